#!/usr/bin/env python3
"""Falsify the uniform hull comparison for a split with incommensurable
integer parts.

The instance is lam = (1, -1, sqrt2, -sqrt2) split into its rational and
irrational halves.  Along the continued-fraction convergents p/q of
sqrt(2) the weight |p - q sqrt2| collapses like 1/p while the direction
weight stays at p, so the ratio grows without bound; the scan finds the
first witness in degree-lex order.
"""

import argparse

from gmpy2 import mpq

from nfkit.coeff import Field
from nfkit.brunovf import dot
from nfkit.conditions import Decomposition, check_hull


def convergents(count):
    # p/q -> (p + 2q) / (p + q)
    p, q = 1, 1
    out = []
    for _ in range(count):
        out.append((p, q))
        p, q = p + 2 * q, p + q
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--bound", type=int, default=30, help="scan order bound")
    ap.add_argument("--c", type=str, default="50", help="hull constant to refute")
    args = ap.parse_args()

    F = Field.number_field([-2, 0, 1], (1.4142, 0.0))
    t = F.gen
    lam = (F.one, -F.one, t, -t)
    D = Decomposition(
        lam,
        [(F.one, -F.one, F.zero, F.zero), (F.zero, F.zero, t, -t)],
        (F.one, F.one))

    print("ratio growth along sqrt(2) convergents p/q:")
    print(f"{'p':>6} {'q':>6} {'|<Q,dir>|':>10} {'|<Q,lam>|':>14} {'ratio':>12}")
    for p, q in convergents(8):
        Q = (0, p, q, 0)
        num = dot(Q, D.vectors[0]).abs_bounds(192)
        den = dot(Q, lam).abs_bounds(192)
        print(f"{p:>6} {q:>6} {float(num[1]):>10.4g} {float(den[1]):>14.6g} "
              f"{float(num[0] / den[1]):>12.4g}")

    print(f"\nscanning orders <= {args.bound} against c = {args.c} ...")
    status = check_hull(lam, D, c=mpq(args.c), B=args.bound)
    print(f"status: {status.kind}")
    if status.witness:
        Q = status.witness
        num = dot(Q, D.vectors[status.witness_j]).abs_bounds(192)[0]
        den = dot(Q, lam).abs_bounds(192)[1]
        print(f"witness Q = {Q} (direction {status.witness_j + 1}), "
              f"certified ratio > {float(num / den):.4g}")


if __name__ == "__main__":
    main()
