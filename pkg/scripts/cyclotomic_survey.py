#!/usr/bin/env python3
"""Survey random root-of-unity normal forms: how often the coefficient
span condition holds, and confirm it agrees with the full product
monomial being a first integral, in every instance."""

import argparse
import random

from nfkit.coeff import Field
from nfkit.brunovf import BrunoField
from nfkit.integrability import integrability_report
from nfkit.resonance import ResonanceContext, admissible_exponents


FIELDS = {
    3: lambda: Field.number_field([1, 1, 1], (-0.5, 0.8660), conj_pow=2),
    4: lambda: Field.gaussian(),
    6: lambda: Field.number_field([1, -1, 1], (0.5, 0.8660), conj_pow=5),
}


def spectrum(field, n):
    zeta = field.gen
    lam = [field.one]
    for _ in range(n - 1):
        lam.append(lam[-1] * zeta)
    return tuple(lam)


def random_scalar(field, rng):
    return field.scalar([rng.randint(-2, 2) for _ in range(field.m)])


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--per-dim", type=int, default=30)
    ap.add_argument("--order", type=int, default=6)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    for n in (3, 4, 6):
        field = FIELDS[n]()
        lam = spectrum(field, n)
        ctx = ResonanceContext(lam)
        points = [Q for Q in admissible_exponents(n, args.order)
                  if ctx.is_resonant(Q) and all(q >= 0 for q in Q) and any(Q)]
        zeta = field.gen
        directions = []
        for r in range(1, n):
            directions.append(tuple(zeta ** (k * r) for k in range(n)))
        holds = 0
        prod = 0
        for trial in range(args.per_dim):
            terms = {}
            for _k in range(rng.randint(1, 2)):
                P = rng.choice(points)
                if trial % 2 == 0:
                    # on-span instance: combination of the shift eigenvectors
                    vec = tuple(field.zero for _ in range(n))
                    for d in rng.sample(directions, rng.randint(1, 2)):
                        c = random_scalar(field, rng)
                        vec = tuple(v + c * x for v, x in zip(vec, d))
                else:
                    vec = tuple(random_scalar(field, rng) for _ in range(n))
                if any(not c.is_zero() for c in vec):
                    terms[P] = vec
            G = BrunoField(field, n, lam, terms, args.order)
            rep = integrability_report(G)
            assert rep.cyclotomic.detected and rep.cyclotomic.agree is True
            holds += bool(rep.cyclotomic.shape_holds)
            prod += bool(rep.cyclotomic.product_integral)
        print(f"n={n}: {args.per_dim} instances, shape condition in {holds}, "
              f"product integral in {prod} (always equal), lattice rank "
              f"{rep.rank}")


if __name__ == "__main__":
    main()
