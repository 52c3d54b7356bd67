#!/usr/bin/env python3
"""Recount rule-set coverage over a sentence file with Python's re module.

Used as an independent check on the C++ rule engine. Both engines work on
UTF-8 bytes, so the patterns are compiled in bytes mode.

    coverage_recount.py --rules rules.json --sentences sentences.jsonl
    coverage_recount.py --self-test
"""

import argparse
import json
import re
import sys

MASK = 0x1F
DIGIT_RUN = re.compile(rb"[0-9]+")


def compile_rules(rules):
    positive = [(re.compile(r["pattern"].encode()), r["stat_type"]) for r in rules.get("positive", [])]
    negative = [re.compile(r["pattern"].encode()) for r in rules.get("negative", [])]
    return positive, negative


def uncovered_digits(buf):
    return sum(1 for b in buf if 0x30 <= b <= 0x39)


def apply_positive(buf, positive):
    text = bytes(buf)
    for pattern, group in positive:
        pos = 0
        while pos <= len(text):
            m = pattern.search(text, pos)
            if m is None:
                break
            start, end = m.span(group) if m.group(group) is not None else m.span()
            chunk = buf[start:end]
            if end > start and MASK not in chunk and any(0x30 <= b <= 0x39 for b in chunk):
                buf[start:end] = bytes([MASK]) * (end - start)
                return True
            if m.start() == len(text):
                break
            pos = m.start() + 1
    return False


def apply_negative(buf, negative):
    progress = False
    for pattern in negative:
        if uncovered_digits(buf) == 0:
            break
        text = bytes(buf)
        for m in pattern.finditer(text):
            for run in DIGIT_RUN.finditer(text, m.start(), m.end()):
                buf[run.start():run.end()] = bytes([MASK]) * (run.end() - run.start())
                progress = True
    return progress


def covered(sentence, positive, negative):
    buf = bytearray(sentence.encode())
    while uncovered_digits(buf) > 0:
        while uncovered_digits(buf) > 0 and apply_positive(buf, positive):
            pass
        if uncovered_digits(buf) == 0:
            break
        if not apply_negative(buf, negative):
            break
    return uncovered_digits(buf) == 0


def recount(rules, sentences):
    positive, negative = compile_rules(rules)
    total = 0
    hit = 0
    for text in sentences:
        total += 1
        hit += covered(text, positive, negative)
    return hit, total


def self_test():
    rules = {
        "positive": [{
            "stat_type": "ttest",
            "pattern": r"(?P<ttest>\(t\(\d+\) = -?\d*\.?\d+, p = \d*\.?\d+\))",
        }],
        "negative": [{"pattern": r"[a-zA-Z]+\s\d+\s[a-zA-Z]+"}],
    }
    positive, negative = compile_rules(rules)
    cases = [
        ("effect of ibuprofen 400 between groups (t(29) = -1.85, p = .074).", True),
        ("(t(29) = -1.85, p = .074) and (t(3) = 2.0, p = .5)", True),
        ("no digits at all", True),
        ("values 12, 13 remained", False),
        ("(t(29) = -1.85, p = .074) in 2020", False),
    ]
    for text, want in cases:
        got = covered(text, positive, negative)
        if got != want:
            print(f"self-test failed on {text!r}: got {got}, want {want}", file=sys.stderr)
            return 1
    # A negative match that spans a masked statistic only covers real digits.
    buf = bytearray(b"ab 1 cd")
    if not apply_negative(buf, negative) or uncovered_digits(buf) != 0:
        print("self-test failed on negative masking", file=sys.stderr)
        return 1
    print("self-test ok")
    return 0


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rules")
    ap.add_argument("--sentences")
    ap.add_argument("--self-test", action="store_true")
    args = ap.parse_args()
    if args.self_test:
        return self_test()
    if not args.rules or not args.sentences:
        ap.error("--rules and --sentences are required")
    with open(args.rules, encoding="utf-8") as f:
        rules = json.load(f)
    with open(args.sentences, encoding="utf-8") as f:
        sentences = [json.loads(line)["text"] for line in f if line.strip()]
    hit, total = recount(rules, sentences)
    print(f"{hit} {total}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
