#!/usr/bin/env python3
"""Cross-check the SMT-LIB2 export against the enumeration engine.

For every `expect` line of every litmus file in a corpus directory, emit the
query with `axcat --engine emit-smt`, solve it with z3, and compare: the query
must be satisfiable exactly when the enumeration verdict is UNSAFE.
"""

import argparse
import pathlib
import subprocess
import sys

import z3

FLAGS = {"model": "--model", "mode": "--mode", "k": "-k", "w": "-w",
         "buffer": "--buffer", "bits": "--bits"}


def trailers(path):
    for line in path.read_text().splitlines():
        words = line.split()
        if words and words[0] == "expect":
            yield words[1], dict(w.split("=", 1) for w in words[2:])


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("axcat", help="path to the axcat binary")
    ap.add_argument("corpus", help="directory of .litmus files")
    args = ap.parse_args()

    failures = 0
    for path in sorted(pathlib.Path(args.corpus).glob("*.litmus")):
        for _, params in trailers(path):
            flags = ["--program", str(path)]
            for key, val in params.items():
                flags += [FLAGS[key], val]
            run = subprocess.run([args.axcat] + flags, capture_output=True, text=True)
            verdict = run.stdout.split("\n", 1)[0]
            smt = subprocess.run([args.axcat, "--engine", "emit-smt"] + flags,
                                 capture_output=True, text=True, check=True).stdout
            solver = z3.Solver()
            solver.from_string(smt)
            sat = solver.check()
            ok = (sat == z3.sat) == (verdict == "UNSAFE") and sat != z3.unknown
            failures += not ok
            settings = " ".join(f"{k}={v}" for k, v in sorted(params.items()))
            print(f"{'ok  ' if ok else 'FAIL'} {path.name:24} {settings:36} {verdict:8} {sat}")
    print(f"{failures} mismatches")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
