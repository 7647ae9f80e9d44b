"""Shared fixtures: coefficient fields, eigenvalue vectors, and seeded
random instance generators used across the suite."""

import random

import pytest
from gmpy2 import mpq

from nfkit.coeff import Field
from nfkit.brunovf import BrunoField, PointTransform, is_admissible, dot, substitute
from nfkit.conditions import Decomposition
from nfkit.commuting import CommutingFamily
from nfkit.resonance import exponents_with_sum


@pytest.fixture(scope="session")
def Q():
    return Field.rationals()


@pytest.fixture(scope="session")
def Qi():
    return Field.gaussian()


@pytest.fixture(scope="session")
def F_sqrt2():
    return Field.number_field([-2, 0, 1], (1.4142, 0.0))


@pytest.fixture(scope="session")
def F_cyc6():
    # t = primitive sixth root of unity; conjugation is t -> t^5
    return Field.number_field([1, -1, 1], (0.5, 0.8660), conj_pow=5)


@pytest.fixture(scope="session")
def F_cyc3():
    # t = primitive third root of unity
    return Field.number_field([1, 1, 1], (-0.5, 0.8660), conj_pow=2)


@pytest.fixture(scope="session")
def F_cyc5():
    # t = primitive fifth root of unity (degree-4 field)
    return Field.number_field([1, 1, 1, 1, 1], (0.30902, 0.95106), conj_pow=4)


def rng_for(name: str) -> random.Random:
    return random.Random(f"nfkit-{name}")


def random_rational(rng, span=3):
    num = rng.randint(-span, span)
    den = rng.randint(1, span)
    return mpq(num, den)


def random_scalar(field, rng, span=3, nonzero=False):
    while True:
        coeffs = [random_rational(rng, span) for _ in range(field.m)]
        s = field.scalar(coeffs)
        if not nonzero or not s.is_zero():
            return s


def random_exponent(n, rng, max_order, min_order=1):
    """A random admissible exponent with entry sum in [min_order, max_order]."""
    while True:
        s = rng.randint(min_order, max_order)
        shell = list(exponents_with_sum(n, s))
        Q = rng.choice(shell)
        if is_admissible(Q):
            return Q


def random_coeff_vector(field, n, Q, rng, span=3):
    """A nonzero coefficient vector compatible with the support rule at Q."""
    neg = next((i for i, q in enumerate(Q) if q == -1), None)
    while True:
        if neg is not None:
            vec = tuple(random_scalar(field, rng, span) if i == neg else field.zero
                        for i in range(n))
        else:
            vec = tuple(random_scalar(field, rng, span) for i in range(n))
        if any(not c.is_zero() for c in vec):
            return vec


def random_bruno_field(field, lam, N, rng, nterms=3, span=3, max_order=None):
    n = len(lam)
    lam = tuple(field.scalar(x) for x in lam)
    terms = {}
    top = max_order or N
    for _ in range(nterms):
        Q = random_exponent(n, rng, top)
        terms[Q] = random_coeff_vector(field, n, Q, rng, span)
    return BrunoField(field, n, lam, terms, N)


def random_point_transform(field, n, N, rng, nterms=2, span=2, min_order=1, max_order=None):
    h = {}
    top = max_order or N
    for _ in range(nterms):
        Q = random_exponent(n, rng, top, min_order=min_order)
        h[Q] = random_coeff_vector(field, n, Q, rng, span)
    return PointTransform(field, n, h, N)


# ---------------------------------------------------------------------------
# The five acceptance eigenvalue vectors


def lam_library(Q, Qi, F_cyc3):
    t = F_cyc3.gen
    return [
        ("1,2", [Q.scalar(1), Q.scalar(2)]),
        ("1,3", [Q.scalar(1), Q.scalar(3)]),
        ("1,-1", [Q.scalar(1), Q.scalar(-1)]),
        ("i,-i", [Qi.gen, -Qi.gen]),
        ("cyc3", [F_cyc3.one, t, t * t]),
    ]


@pytest.fixture(scope="session")
def lam_lib(Q, Qi, F_cyc3):
    return lam_library(Q, Qi, F_cyc3)


# ---------------------------------------------------------------------------
# Structured instance generators


def nonneg_lattice_points(lam, max_order, count=6):
    """Nonnegative resonant exponents of order in [1, max_order] (excluding 0)."""
    from nfkit.resonance import ResonanceContext, admissible_exponents

    ctx = ResonanceContext(lam)
    out = []
    for Q in admissible_exponents(ctx.n, max_order):
        if all(q >= 0 for q in Q) and any(q > 0 for q in Q) and ctx.is_resonant(Q):
            out.append(Q)
            if len(out) >= count:
                break
    return out


def build_shape_instance(field, lam, N, rng, D=None, n_resonant=2, n_tail=2, span=2,
                         coeff_scale=None):
    """A field A + G_* + F_* whose resonant part satisfies the span condition
    for the decomposition D (trivial decomposition by default).

    G_* is assembled as sum_j (x (.) lam^(j)) * s_j(x) with s_j supported on
    nonnegative resonant exponents, which keeps every term inside the
    admissible cone.  Returns (F, D, m) with F in partial normal form below
    m and the tail starting at order m.
    """
    lam = tuple(field.scalar(x) for x in lam)
    n = len(lam)
    if D is None:
        D = Decomposition.trivial(lam)
    points = nonneg_lattice_points(lam, max(2, N // 2))
    if not points:
        raise RuntimeError("eigenvalues without small nonneg resonances")
    terms = {}
    top_res = 0
    for _ in range(n_resonant):
        P = rng.choice(points)
        j = rng.randrange(D.r)
        beta = random_scalar(field, rng, span, nonzero=True)
        if coeff_scale is not None:
            beta = beta * coeff_scale
        vec = tuple(beta * x for x in D.vectors[j])
        if all(c.is_zero() for c in vec):
            continue
        cur = terms.get(P)
        terms[P] = vec if cur is None else tuple(a + b for a, b in zip(cur, vec))
        top_res = max(top_res, sum(P))
    terms = {P: v for P, v in terms.items() if any(not c.is_zero() for c in v)}
    m = max(top_res + 1, 2)
    for _ in range(n_tail):
        if m > N:
            break
        Qe = random_exponent(n, rng, N, min_order=min(m, N))
        vec = random_coeff_vector(field, n, Qe, rng, span)
        if coeff_scale is not None:
            vec = tuple(coeff_scale * c for c in vec)
        terms.setdefault(Qe, vec)
    return BrunoField(field, n, lam, terms, N), D, m


def build_commuting_family(Q, N, rng, conjugate=True):
    """s = 2, n = 3 family built from a joint normal form and (optionally)
    conjugated by a shared random transform; commutes exactly by
    construction."""
    lam1 = (Q.scalar(1), Q.scalar(-1), Q.scalar(0))
    lam2 = (Q.scalar(0), Q.scalar(1), Q.scalar(-1))
    # shared direction with zero entry sum, series in powers of x1 x2 x3
    a = random_scalar(Q, rng, 2, nonzero=True)
    w = (a, -a - Q.one, Q.one)
    terms1 = {}
    terms2 = {}
    for k in range(1, N // 3 + 1):
        P = (k, k, k)
        c1 = random_scalar(Q, rng, 2)
        c2 = random_scalar(Q, rng, 2)
        if not c1.is_zero():
            terms1[P] = tuple(c1 * x for x in w)
        if not c2.is_zero():
            terms2[P] = tuple(c2 * x for x in w)
    G1 = BrunoField(Q, 3, lam1, terms1, N)
    G2 = BrunoField(Q, 3, lam2, terms2, N)
    if not conjugate:
        return CommutingFamily([G1, G2]), None
    H = random_point_transform(Q, 3, N, rng, nterms=rng.randint(1, 2), span=1)
    return CommutingFamily([substitute(G1, H), substitute(G2, H)]), H
