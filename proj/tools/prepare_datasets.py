#!/usr/bin/env python3
"""Convert local copies of the small benchmark sets to libsvm format.

The raw comma-separated files shipped with the ``keel_ds`` package are used
as the source. Numeric columns are written as-is; the mushroom attributes are
one-hot encoded. Output files go to ``data/`` (or the directory given).
"""

import argparse
import csv
import os
import sys

SETS = {
    # name: (raw file, positive label)
    "diabetes": ("pima.dat", "tested_positive"),
    "breast-cancer": ("wisconsin.dat", "4"),
    "sonar": ("sonar.dat", "R"),
    "mushrooms": ("mushroom.dat", "p"),
}


def raw_dir():
    try:
        import keel_ds
    except ImportError:
        sys.exit("keel_ds is not installed; pip install keel_ds")
    return os.path.join(os.path.dirname(keel_ds.__file__), "data", "balanced", "raw")


def read_rows(path):
    with open(path, newline="") as fh:
        for rec in csv.reader(fh):
            rec = [c.strip() for c in rec]
            if rec and not rec[0].startswith("@"):
                yield rec


def numeric_lines(rows, positive):
    for rec in rows:
        label = "+1" if rec[-1] == positive else "-1"
        feats = [f"{k + 1}:{v}" for k, v in enumerate(rec[:-1]) if float(v) != 0.0]
        yield " ".join([label] + feats)


def one_hot_lines(rows, positive):
    rows = list(rows)
    ncols = len(rows[0]) - 1
    levels = [sorted({r[c] for r in rows}) for c in range(ncols)]
    offsets, total = [], 0
    for lv in levels:
        offsets.append(total)
        total += len(lv)
    for rec in rows:
        label = "+1" if rec[-1] == positive else "-1"
        idx = sorted(offsets[c] + levels[c].index(rec[c]) + 1 for c in range(ncols))
        yield " ".join([label] + [f"{i}:1" for i in idx])


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out", nargs="?", default=os.path.join(os.path.dirname(__file__), "..", "data"))
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    src = raw_dir()
    for name, (raw, positive) in SETS.items():
        rows = read_rows(os.path.join(src, raw))
        lines = one_hot_lines(rows, positive) if name == "mushrooms" else numeric_lines(rows, positive)
        dest = os.path.join(args.out, name + ".libsvm")
        with open(dest, "w") as fh:
            n = 0
            for line in lines:
                fh.write(line + "\n")
                n += 1
        print(f"{dest}: {n} rows")


if __name__ == "__main__":
    main()
