#!/usr/bin/env python3
"""Freeze execution results for the recorded transform fixture.

Reads tests/fixtures/transform_cases.json (parent sample, target, model
response), runs the first python code block of each response with python3,
and writes tests/fixtures/transform_recorded.jsonl plus the matching
execution table tests/fixtures/transform_exec.jsonl.
"""
import json
import re
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
FIX = ROOT / "tests" / "fixtures"
FENCE = re.compile(r"```(?:python|py|python3)?[ \t]*\n(.*?)```", re.S)


def first_block(text):
    m = FENCE.search(text)
    return m.group(1).rstrip("\n") if m else None


def run(code):
    try:
        p = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, timeout=10)
    except subprocess.TimeoutExpired:
        return {"status": "timeout", "answer_text": None, "stdout": ""}
    lines = [l for l in p.stdout.splitlines() if l.strip()]
    if p.returncode != 0:
        return {"status": "runtime_error", "answer_text": None, "stdout": p.stderr[-400:]}
    if not lines:
        return {"status": "runtime_error", "answer_text": None, "stdout": ""}
    return {"status": "ok", "answer_text": lines[-1].strip(), "stdout": p.stdout[-400:]}


def same(a, b):
    try:
        return Fraction(a) == Fraction(b) or abs(float(a) - float(b)) <= 1e-4 * max(1, abs(float(a)), abs(float(b)))
    except (ValueError, ZeroDivisionError):
        return a.strip().lower() == b.strip().lower()


def main():
    cases = json.loads((FIX / "transform_cases.json").read_text())
    recorded, table = [], {}
    for c in cases:
        code = first_block(c["response"])
        ex = run(code) if code else None
        verified = bool(ex and ex["status"] == "ok" and same(ex["answer_text"], c["parent"]["answer"]))
        if code:
            table[code] = {"code": code, **ex, "duration_ms": 0}
        recorded.append({"parent": c["parent"], "target": c["target"], "response": c["response"],
                         "extracted_code": code, "execution": ex, "verified": verified})
    with open(FIX / "transform_recorded.jsonl", "w") as f:
        for r in recorded:
            f.write(json.dumps(r) + "\n")
    with open(FIX / "transform_exec.jsonl", "w") as f:
        for code in sorted(table):
            f.write(json.dumps(table[code]) + "\n")
    print(f"{len(recorded)} cases, {sum(r['verified'] for r in recorded)} verified")


if __name__ == "__main__":
    main()
