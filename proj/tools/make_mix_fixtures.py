"""Writes the small mixing fixtures: 26 math-text, 26 math-code, 21 general-code
records and verified/unverified style variants for every target."""
import json
import pathlib

OUT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "mix"
TARGETS = [
    "comment_usage:no_comment", "comment_usage:concise", "comment_usage:detailed",
    "naming:descriptive", "naming:obscure", "generality:hardcoded", "generality:generalized",
]


def write(name, records):
    OUT.mkdir(parents=True, exist_ok=True)
    with open(OUT / name, "w") as f:
        for r in records:
            f.write(json.dumps(r, separators=(",", ":")) + "\n")


def main():
    mt, mc, gc, sv = [], [], [], []
    for i in range(26):
        a, b = 3 + i, 7 + 2 * i
        q = f"A crate holds {a} rows of {b} apples. How many apples are in the crate?"
        mt.append({"id": f"q{i:03d}", "question": q, "rationale": f"{a} rows times {b} apples is {a * b}.",
                   "rationale_kind": "text", "answer": str(a * b), "source": "math_text"})
        mc.append({"id": f"q{i:03d}", "question": q, "rationale": f"rows = {a}\nper_row = {b}\nprint(rows * per_row)",
                   "rationale_kind": "code", "answer": str(a * b), "source": "math_code"})
        for t, target in enumerate(TARGETS):
            sv.append({"id": f"q{i:03d}::{target.split(':')[1]}", "question": q,
                       "rationale": f"# {target}\nprint({a} * {b})", "rationale_kind": "code",
                       "answer": str(a * b), "source": "synthesized", "parent_id": f"q{i:03d}",
                       "target": target, "verified": (i + t) % 5 != 0})
    for i in range(21):
        gc.append({"id": f"g{i:03d}", "question": f"Write a function returning the square of {i}.",
                   "rationale": f"def square():\n    return {i} * {i}\nprint(square())",
                   "rationale_kind": "code", "answer": str(i * i), "source": "general_code"})
    write("math_text.jsonl", mt)
    write("math_code.jsonl", mc)
    write("general_code.jsonl", gc)
    write("style_variants.jsonl", sv)


if __name__ == "__main__":
    main()
