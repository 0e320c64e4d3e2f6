#!/usr/bin/env python3
"""Regenerates the JSON corpus, task files and the scripted trap model under data/.

Deterministic: the same script always writes the same files.
"""
import json
import random
from pathlib import Path

DATA = Path(__file__).resolve().parent.parent / "data"
KEYS = ["id", "name", "value", "type", "count", "status", "user", "city", "age", "score", "tags", "code"]
WORDS = ["ba", "ce", "di", "fo", "gu", "han", "ker", "lis", "mot", "nul", "pes", "rat", "sun", "tel", "vor"]


def scalar(rng):
    kind = rng.randrange(5)
    if kind == 0:
        return rng.randrange(100)
    if kind == 1:
        return rng.choice(WORDS)
    if kind == 2:
        return rng.choice([True, False])
    if kind == 3:
        return None
    return [rng.randrange(10) for _ in range(rng.randrange(1, 3))]


def document(rng, max_keys):
    if rng.random() < 0.2:
        return [rng.randrange(100) for _ in range(rng.randrange(1, 4))]
    keys = rng.sample(KEYS, rng.randrange(1, max_keys + 1))
    return {k: scalar(rng) for k in keys}


def compact(doc):
    return json.dumps(doc, separators=(",", ":"))


def write_jsonl(path, rows):
    path.write_text("".join(json.dumps(r) + "\n" for r in rows))


def main():
    rng = random.Random(2024)
    # Corpus lines mix compact and spaced layouts.
    lines = []
    for _ in range(400):
        doc = document(rng, 3)
        lines.append(json.dumps(doc) if rng.random() < 0.5 else compact(doc))
    (DATA / "json_corpus.txt").write_text("\n".join(lines) + "\n")

    tasks = []
    for i in range(100):
        doc = document(rng, 2)
        tasks.append({"id": f"json-{i:03d}", "prompt": "", "output": compact(doc)})
    write_jsonl(DATA / "json_tasks_100.jsonl", tasks)
    write_jsonl(DATA / "json_tasks.jsonl", tasks[:24])

    # Trap tasks: the most likely first step leads to a low-probability
    # continuation, a slightly less likely one to a confident answer.
    rules, traps = [], []
    for k in range(50):
        key = KEYS[k % len(KEYS)]
        decoy = KEYS[(k + 5) % len(KEYS)]
        prompt = f"task {k}"
        truth = "{\"" + key + "\":" + str(k) + "}"
        if k % 2 == 0:
            rules.append({"prompt": prompt, "prefix": "", "probs": {"[": 0.45, "{\"": 0.35}})
        else:
            rules.append({"prompt": prompt, "prefix": "", "probs": {"{\"": 0.9}})
            rules.append({"prompt": prompt, "prefix": "{\"", "probs": {decoy: 0.45, key: 0.35}})
        if k % 2 == 0:
            rules.append({"prompt": prompt, "prefix": "{\"", "probs": {key: 0.9}})
        steps = [("{\"" + key, "\":"), ("{\"" + key + "\":", str(k)), ("{\"" + key + "\":" + str(k), "}"),
                 (truth, "<eos>")]
        for prefix, token in steps:
            rules.append({"prompt": prompt, "prefix": prefix, "probs": {token: 0.9}})
        # The reference length is the scripted path: {" key ": k } eos.
        traps.append({"id": f"trap-{k:02d}", "prompt": prompt, "output": truth, "l_gt": len(steps) + 2})
    model = {"floor": 0.01, "rules": rules, "default": {"0": 0.2, "]": 0.2, "<eos>": 0.2, ",": 0.1, "}": 0.1}}
    (DATA / "trap_model.json").write_text(json.dumps(model, indent=1) + "\n")
    write_jsonl(DATA / "trap_tasks.jsonl", traps)


if __name__ == "__main__":
    main()
