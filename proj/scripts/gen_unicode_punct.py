#!/usr/bin/env python3
"""Regenerates src/unicode_punct.inc from the Python unicodedata tables."""
import sys
import unicodedata

ranges = []
start = None
prev = None
for cp in range(sys.maxunicode + 1):
    is_punct = unicodedata.category(chr(cp)).startswith("P")
    if is_punct:
        if start is None:
            start = cp
        prev = cp
    elif start is not None:
        ranges.append((start, prev))
        start = None
if start is not None:
    ranges.append((start, prev))

print(f"// Generated by scripts/gen_unicode_punct.py (Unicode {unicodedata.unidata_version}).")
print("// Closed ranges of code points in general categories Pc Pd Ps Pe Pi Pf Po.")
for a, b in ranges:
    print(f"{{0x{a:04X}, 0x{b:04X}}},")
