"""First-integral analysis of normal forms.

For a field in normal form the Lie derivative of a (Laurent) monomial
factors through the monomial itself:

    L_G(x^Q) = x^Q * sum_P <Q, G_P> x^P,

so x^Q is a first integral precisely when the factor series vanishes,
an exact finite check on the stored coefficients.  On top of this sit
the complete-integrability rank test against the resonance lattice and
the special-shape flags (corank-one, conjugate-pair corank-two, and the
root-of-unity spectrum where the shape condition is equivalent to the
full product monomial being an integral).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from .brunovf import BrunoField, deglex_key, dot, to_component_series
from .conditions import Decomposition, check_AS, require_normal_form, _solve_span
from .errors import DimensionMismatchError, InvalidInputError
from .resonance import lattice
from . import series as sr


def lie_derivative_monomial(G: BrunoField, Q) -> dict:
    """Factor series of L_G(x^Q) (coefficients <Q, G_P> keyed by P).

    Requires a normal form: only then does the derivative factor through
    x^Q.  The linear part contributes at P = 0.
    """
    require_normal_form(G)
    if len(Q) != G.n:
        raise DimensionMismatchError("monomial exponent has wrong length")
    factor = {}
    w0 = dot(Q, G.lam)
    if not w0.is_zero():
        factor[(0,) * G.n] = w0
    for P, vec in G.terms.items():
        w = dot(Q, vec)
        if not w.is_zero():
            factor[P] = w
    return factor


def is_first_integral(G: BrunoField, Q, N: int | None = None) -> bool:
    """Whether x^Q (negative entries allowed) is a first integral of G,
    judged on the stored coefficients up to order N.

    A truncated field can only support the claim "integral up to order N";
    nothing is asserted beyond the truncation.
    """
    N = G.trunc_order if N is None else N
    factor = lie_derivative_monomial(G, Q)
    return all(sum(P) > N for P in factor)


def series_integral_check(F: BrunoField, psi: dict, N: int | None = None) -> bool:
    """Exact vanishing of L_F(psi) up to total degree N.

    Works for any field (no normal form needed): the Lie derivative is
    assembled from the component polynomials as sum_i (d psi / d x_i) F_i.
    psi is a scalar series over nonnegative exponents; terms of the
    derivative above degree N are outside the supported claim and are
    ignored.
    """
    N = F.trunc_order if N is None else N
    if any(len(M) != F.n for M in psi):
        raise DimensionMismatchError("series exponent length differs from dimension")
    if any(m < 0 for M in psi for m in M):
        raise InvalidInputError("series check expects nonnegative exponents")
    comps = to_component_series(F)
    acc: dict = {}
    for i in range(F.n):
        dpsi = sr.sdiff(psi, i)
        if dpsi and comps[i]:
            sr.siadd(acc, sr.smul(dpsi, comps[i], N))
    return not sr.struncate(acc, N)


# ---------------------------------------------------------------------------
# Report


@dataclass
class CyclotomicEquivalence:
    detected: bool
    shape_holds: bool | None = None
    product_integral: bool | None = None

    @property
    def agree(self):
        if not self.detected:
            return None
        return self.shape_holds == self.product_integral


@dataclass
class IntegralReport:
    order: int
    lattice_basis: tuple
    rank: int
    integral_flags: list                  # (Q, bool) per basis vector
    simplified_A_case: bool
    collinear: bool | None                # all resonant G_P in K lam (corank-one path)
    collinear_witness: tuple | None
    A2_case: bool
    conjugate_independent: bool | None
    cyclotomic: CyclotomicEquivalence
    claims: list = dc_field(default_factory=list)


def _detect_root_of_unity_spectrum(G: BrunoField):
    """Return the ratio zeta when lam = c (1, zeta, ..., zeta^(n-1)) with
    zeta a primitive n-th root of unity, else None."""
    lam = G.lam
    n = G.n
    if n < 3 or any(s.is_zero() for s in lam):
        return None
    zeta = lam[1] / lam[0]
    for i in range(1, n - 1):
        if lam[i + 1] != zeta * lam[i]:
            return None
    one = G.field.one
    power = one
    for k in range(1, n):
        power = power * zeta
        if k < n and power == one:
            return None
    if power * zeta != one:
        return None
    return zeta


def _cyclotomic_directions(field, n, zeta):
    dirs = []
    for r in range(1, n):
        zr = field.one
        row = []
        for _ in range(n):
            row.append(zr)
            zr = zr * (zeta ** r)
        dirs.append(tuple(row))
    return dirs


def integrability_report(G: BrunoField, N: int | None = None) -> IntegralReport:
    """Rank the resonance lattice, test every basis monomial for being a
    first integral of G, and set the special-shape flags whose exact
    hypotheses could be verified on the truncated data.

    All claims are order-N statements about the stored coefficients; the
    conclusions they support for analytic fields are recorded as plain
    text in ``claims``.
    """
    require_normal_form(G)
    N = G.trunc_order if N is None else N
    basis = lattice(G.lam)
    flags = [(tuple(Q), is_first_integral(G, Q, N)) for Q in basis]
    all_integrals = all(ok for _, ok in flags)
    n = G.n
    claims = []

    collinear = None
    collinear_witness = None
    simplified = False
    if basis.rank == n - 1 and all_integrals:
        collinear = True
        for P, vec in sorted(G.terms.items(), key=lambda kv: deglex_key(kv[0])):
            if _solve_span((G.lam,), vec, G.field) is None:
                collinear = False
                collinear_witness = (P, vec)
                break
        simplified = collinear
        if simplified:
            claims.append(
                f"corank-one case verified to order {N}: the lattice has rank n-1, "
                "all basis monomials are first integrals, and every resonant "
                "coefficient vector is a multiple of the eigenvalue vector; for an "
                "analytic field this shape forces integer-multiple divisors and a "
                "convergent normalizing transformation")

    conj_indep = None
    a2_case = False
    if G.field.has_conjugation and not G.field.real_embedding:
        from .conditions import _rank
        conj_lam = tuple(s.conj() for s in G.lam)
        conj_indep = _rank((G.lam, conj_lam), G.field) == 2
        if basis.rank == n - 2 and conj_indep and all_integrals:
            a2_case = True
            claims.append(
                f"corank-two conjugate-pair case verified to order {N}: rank n-2 "
                "lattice with all basis monomials first integrals and independent "
                "conjugate eigenvalue vectors; for an analytic field the "
                "conjugate-pair shape condition then holds and a convergent "
                "normalizing transformation exists")

    zeta = _detect_root_of_unity_spectrum(G)
    if zeta is not None:
        dirs = _cyclotomic_directions(G.field, n, zeta)
        gammas = [G.lam[0]] + [G.field.zero] * (n - 2)
        D = Decomposition(G.lam, dirs, gammas)
        rep = check_AS(G, D)
        prod = is_first_integral(G, (1,) * n, N)
        cyc = CyclotomicEquivalence(detected=True, shape_holds=rep.span_holds,
                                    product_integral=prod)
        if cyc.agree is False:
            raise AssertionError(
                "shape condition and product-monomial integral disagree on a "
                "root-of-unity spectrum")
        claims.append(
            f"root-of-unity spectrum: to order {N} the coefficient-shape condition "
            f"holds iff the full product monomial is a first integral "
            f"(both sides computed independently: {rep.span_holds})")
    else:
        cyc = CyclotomicEquivalence(detected=False)

    return IntegralReport(order=N, lattice_basis=tuple(tuple(Q) for Q in basis),
                          rank=basis.rank, integral_flags=flags,
                          simplified_A_case=simplified, collinear=collinear,
                          collinear_witness=collinear_witness, A2_case=a2_case,
                          conjugate_independent=conj_indep, cyclotomic=cyc,
                          claims=claims)
