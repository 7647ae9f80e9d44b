"""Convergence-condition analysis for normal forms.

Covers additive decompositions of the eigenvalue vector with their
isoresonance and diophantine-hull checks, the coefficient-shape condition
on normal forms (every resonant coefficient vector lies in the span of
the decomposition directions), nilpotency of the transport operator, the
closed-form solution of the homological equation under the shape
condition, weighted absolute-coefficient (majorant) norms, and the
numeric verification of the single-step size estimate.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from gmpy2 import isqrt, mpq

from .coeff import ComplexBox, Scalar, max_precision, to_mpq
from .brunovf import (
    BrunoField,
    all_terms,
    delta_apply_maps,
    deglex_key,
    dot,
    series_times_field,
    tm_add,
)
from .errors import (
    InvalidDecompositionError,
    InvalidInputError,
    NotInPartialNormalFormError,
    NotNormalFormError,
    PrecisionFloorReached,
)
from .normalize import block_step
from .resonance import ResonanceContext, admissible_exponents, lattice, omega_sequence
from . import series as sr


# ---------------------------------------------------------------------------
# Rational bound helpers


def sqrt_bounds(q: mpq):
    """Exact-rational (lower, upper) enclosure of sqrt(q) for q >= 0."""
    if q < 0:
        raise InvalidInputError("square root of a negative bound")
    rr = q.numerator * q.denominator
    r = isqrt(rr)
    lo = mpq(r, q.denominator)
    hi = lo if r * r == rr else mpq(r + 1, q.denominator)
    return lo, hi


def _abs_lower_positive(s: Scalar, max_prec=None) -> mpq:
    """A positive rational lower bound of |s| for nonzero s."""
    if s.is_zero():
        raise InvalidInputError("zero scalar has no positive lower bound")
    cap = max_prec or max_precision()
    prec = 96
    while True:
        lo, _ = s.abs_bounds(prec)
        if lo > 0:
            return lo
        if prec >= cap:
            raise PrecisionFloorReached(f"|{s!r}| not separated from zero")
        prec *= 2


@dataclass(frozen=True)
class Bound:
    """A certified rational enclosure lo <= value <= hi."""

    lo: mpq
    hi: mpq

    def __add__(self, other):
        return Bound(self.lo + other.lo, self.hi + other.hi)

    def scale(self, q):
        return Bound(self.lo * q, self.hi * q) if q >= 0 else Bound(self.hi * q, self.lo * q)

    @classmethod
    def zero(cls):
        return cls(mpq(0), mpq(0))


# ---------------------------------------------------------------------------
# Decompositions


class Decomposition:
    """An additive decomposition lam = sum_j gamma_j lam^(j).

    The directions are required to be linearly independent over the
    ambient field (hence over C, since independence is witnessed by a
    nonzero minor), and the reconstruction is checked exactly.
    """

    def __init__(self, lam, vectors, gammas):
        lam = tuple(lam)
        self.field = lam[0].field
        self.lam = lam
        self.n = len(lam)
        self.vectors = tuple(tuple(self.field.scalar(x) for x in v) for v in vectors)
        self.gammas = tuple(self.field.scalar(g) for g in gammas)
        self.r = len(self.vectors)
        if len(self.gammas) != self.r:
            raise InvalidDecompositionError("one coefficient per direction required")
        if any(len(v) != self.n for v in self.vectors):
            raise InvalidDecompositionError("direction length differs from dimension")
        if _rank(self.vectors, self.field) != self.r:
            raise InvalidDecompositionError("directions are linearly dependent")
        recon = [self.field.zero] * self.n
        for g, v in zip(self.gammas, self.vectors):
            recon = [a + g * b for a, b in zip(recon, v)]
        if tuple(recon) != lam:
            raise InvalidDecompositionError("sum gamma_j lam^(j) differs from lam")

    @classmethod
    def trivial(cls, lam):
        lam = tuple(lam)
        field = lam[0].field
        return cls(lam, (lam,), (field.one,))

    def weights(self, Q):
        """The values <Q, lam^(j)> for j = 1..r."""
        return tuple(dot(Q, v) for v in self.vectors)

    def solve_span(self, target):
        """Coefficients beta with sum beta_j lam^(j) = target, or None."""
        return _solve_span(self.vectors, target, self.field)


def _rank(rows, field):
    mat = [list(r) for r in rows]
    rank = 0
    cols = len(mat[0]) if mat else 0
    piv_col = 0
    while rank < len(mat) and piv_col < cols:
        pivot = next((i for i in range(rank, len(mat)) if not mat[i][piv_col].is_zero()), None)
        if pivot is None:
            piv_col += 1
            continue
        mat[rank], mat[pivot] = mat[pivot], mat[rank]
        inv = mat[rank][piv_col].inverse()
        for i in range(len(mat)):
            if i == rank or mat[i][piv_col].is_zero():
                continue
            factor = mat[i][piv_col] * inv
            mat[i] = [a - factor * b for a, b in zip(mat[i], mat[rank])]
        rank += 1
        piv_col += 1
    return rank


def _solve_span(vectors, target, field):
    r = len(vectors)
    n = len(target)
    # augmented system over the field: columns are the directions
    rows = [[vectors[j][i] for j in range(r)] + [target[i]] for i in range(n)]
    rank = 0
    piv_cols = []
    for col in range(r):
        pivot = next((i for i in range(rank, n) if not rows[i][col].is_zero()), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        inv = rows[rank][col].inverse()
        rows[rank] = [x * inv for x in rows[rank]]
        for i in range(n):
            if i == rank or rows[i][col].is_zero():
                continue
            f = rows[i][col]
            rows[i] = [a - f * b for a, b in zip(rows[i], rows[rank])]
        piv_cols.append(col)
        rank += 1
    for i in range(rank, n):
        if not rows[i][r].is_zero():
            return None
    betas = [field.zero] * r
    for i, col in enumerate(piv_cols):
        betas[col] = rows[i][r]
    return tuple(betas)


# ---------------------------------------------------------------------------
# Isoresonance and diophantine hull


@dataclass(frozen=True)
class IsoresonanceReport:
    holds: bool
    witness: tuple | None = None  # (P, j)

    def __bool__(self):
        return self.holds


def check_isoresonance(lam, D: Decomposition) -> IsoresonanceReport:
    """Every direction annihilates the resonance lattice of lam.

    Verified on an integer basis of the lattice, which suffices by
    linearity of the pairing.
    """
    basis = lattice(lam)
    for P in basis:
        for j, v in enumerate(D.vectors):
            if not dot(P, v).is_zero():
                return IsoresonanceReport(holds=False, witness=(tuple(P), j))
    return IsoresonanceReport(holds=True)


@dataclass(frozen=True)
class HullStatus:
    kind: str  # certified_r1 | certified_a2 | certified_two_lines | scan_passed | violated | indeterminate
    c: mpq | None = None
    witness: tuple | None = None
    witness_j: int | None = None
    bound: int | None = None
    note: str = ""

    @property
    def certified(self):
        return self.kind.startswith("certified")

    @property
    def ok(self):
        return self.certified or self.kind == "scan_passed"


def _is_real_in_field(s: Scalar) -> bool | None:
    """Exact realness of the designated embedding, or None if undecidable."""
    f = s.field
    if f.real_embedding:
        return True
    if f.has_conjugation:
        return s.conj() == s
    return None


def _two_lines_certificate(lam, D: Decomposition):
    if D.r != 2:
        return None
    field = D.field
    mus = []
    zetas = []
    for g, v in zip(D.gammas, D.vectors):
        mu = tuple(g * x for x in v)
        zeta = next((x for x in mu if not x.is_zero()), None)
        if zeta is None:
            return None
        for x in mu:
            if x.is_zero():
                continue
            realness = _is_real_in_field(x / zeta)
            if realness is not True:
                return None
        mus.append(mu)
        zetas.append(zeta)
    ratio_real = _is_real_in_field(zetas[0] / zetas[1])
    if ratio_real is not False:
        return None  # same line, or not decidable
    # |cos| of the angle between the lines, certified strictly below 1
    prec = 160
    cap = max_precision()
    while True:
        b1 = zetas[0].embed(prec)
        b2 = zetas[1].embed(prec)
        num = b1 * b2.conjugate()
        re_hi = abs(_box_re_bounds(num)[0])
        re_hi = max(re_hi, abs(_box_re_bounds(num)[1]))
        d1_lo = b1.abs_bounds_mpq()[0]
        d2_lo = b2.abs_bounds_mpq()[0]
        if d1_lo > 0 and d2_lo > 0:
            rho_sq_hi = (re_hi * re_hi) / (d1_lo * d1_lo * d2_lo * d2_lo)
            if rho_sq_hi < 1:
                break
        if prec >= cap:
            return None
        prec *= 2
    rho_hi = sqrt_bounds(rho_sq_hi)[1]
    if rho_hi >= 1:
        return None
    # c' = (1 - rho)^(-1/2), then undo the gamma scaling per direction
    base_lo = sqrt_bounds(1 - rho_hi)[0]
    if base_lo <= 0:
        return None
    c_prime = 1 / base_lo
    scale = max(1 / _abs_lower_positive(g) for g in D.gammas)
    return HullStatus(kind="certified_two_lines", c=c_prime * scale,
                      note=f"lines certificate with |cos|^2 <= {float(rho_sq_hi):.6g}")


def _box_re_bounds(box: ComplexBox):
    from .coeff import _exact_to_mpq
    re = _exact_to_mpq(box.re)
    rad = _exact_to_mpq(box.rad)
    return re - rad, re + rad


def _a2_certificate(lam, D: Decomposition):
    field = D.field
    if D.r != 2 or not field.has_conjugation or field.real_embedding:
        return None
    lam = tuple(lam)
    conj_lam = tuple(s.conj() for s in lam)
    one, zero = field.one, field.zero
    patterns = [((lam, conj_lam), (one, zero)), ((conj_lam, lam), (zero, one))]
    for vecs, gammas in patterns:
        if D.vectors == vecs and D.gammas == gammas:
            return HullStatus(kind="certified_a2", c=mpq(1),
                              note="second direction is the conjugate eigenvalue vector")
    return None


def check_hull(lam, D: Decomposition, c=None, B: int = 32, max_prec=None) -> HullStatus:
    """Decide the uniform comparison |<Q, lam^(j)>| <= c |<Q, lam>|.

    Certificates are tried first: a single direction, the conjugate-pair
    pattern (c = 1), and the two-lines geometry with
    c = (1 - rho)^(-1/2) from the angle between the lines.  Otherwise all
    admissible Q up to order B are scanned against the caller's bound c
    with certified interval comparisons; the verdict is never wrong, and
    an unresolved comparison at the precision cap is reported as
    indeterminate rather than decided.
    """
    lam = tuple(lam)
    if D.r == 1:
        g = D.gammas[0]
        cval = mpq(1) if g == D.field.one else 1 / _abs_lower_positive(g)
        return HullStatus(kind="certified_r1", c=cval)
    cert = _a2_certificate(lam, D)
    if cert is not None:
        return cert
    cert = _two_lines_certificate(lam, D)
    if cert is not None:
        return cert
    if c is None:
        raise InvalidInputError("no certificate applies; a scan bound c is required")
    c = to_mpq(c)
    cap = max_prec or max_precision()
    ctx = ResonanceContext(lam)
    for Q in admissible_exponents(ctx.n, B):
        if all(q == 0 for q in Q):
            continue
        w = ctx.weight(Q)
        if w.is_zero():
            for j, v in enumerate(D.vectors):
                if not dot(Q, v).is_zero():
                    return HullStatus(kind="violated", c=c, witness=Q, witness_j=j,
                                      bound=B, note="resonance not inherited by direction")
            continue
        prec = 96
        while True:
            w_lo, w_hi = w.abs_bounds(prec)
            pending = False
            for j, v in enumerate(D.vectors):
                wj = dot(Q, v)
                j_lo, j_hi = wj.abs_bounds(prec)
                if j_hi <= c * w_lo:
                    continue
                if j_lo > c * w_hi:
                    return HullStatus(kind="violated", c=c, witness=Q, witness_j=j, bound=B)
                pending = True
            if not pending:
                break
            if prec >= cap:
                return HullStatus(kind="indeterminate", c=c, witness=Q, bound=B,
                                  note="comparison unresolved at precision cap")
            prec *= 2
    return HullStatus(kind="scan_passed", c=c, bound=B)


# ---------------------------------------------------------------------------
# Coefficient-shape condition on normal forms


@dataclass
class ASReport:
    span_holds: bool
    offending: tuple | None          # (P, G_P) when span fails
    betas: dict                      # P -> tuple of r Scalars
    s_series: list                   # r series dicts P -> Scalar
    isoresonance: IsoresonanceReport
    hull: HullStatus | None
    a2_pattern: bool
    decomposition: Decomposition

    @property
    def condition_holds(self):
        """Shape + isoresonance + hull, the full package."""
        return (self.span_holds and self.isoresonance.holds
                and self.hull is not None and self.hull.ok)


def check_AS(G: BrunoField, D: Decomposition, hull_c=None, hull_B: int = 32) -> ASReport:
    """Test whether every resonant coefficient vector of a normal form lies
    in the span of the decomposition directions, and extract the scalar
    series multiplying each direction.

    The span membership is an exact r-unknown linear solve per stored
    degree.  Isoresonance and hull status ride along as separate flags;
    several downstream results need only the isoresonance part.
    """
    require_normal_form(G)
    if tuple(D.lam) != tuple(G.lam):
        raise InvalidDecompositionError("decomposition is for a different eigenvalue vector")
    betas = {}
    s_series = [dict() for _ in range(D.r)]
    offending = None
    span_holds = True
    for P, vec in sorted(G.terms.items(), key=lambda kv: deglex_key(kv[0])):
        sol = D.solve_span(vec)
        if sol is None:
            span_holds = False
            offending = (P, vec)
            break
        betas[P] = sol
        for j, b in enumerate(sol):
            if not b.is_zero():
                s_series[j][P] = b
    iso = check_isoresonance(G.lam, D)
    hull = check_hull(G.lam, D, c=hull_c, B=hull_B) if hull_c is not None else _certificate_only(G.lam, D)
    a2 = _a2_certificate(G.lam, D) is not None and span_holds
    return ASReport(span_holds=span_holds, offending=offending, betas=betas,
                    s_series=s_series, isoresonance=iso, hull=hull,
                    a2_pattern=a2, decomposition=D)


def _certificate_only(lam, D):
    if D.r == 1:
        return check_hull(lam, D)
    cert = _a2_certificate(tuple(lam), D)
    if cert is not None:
        return cert
    return _two_lines_certificate(tuple(lam), D)


def require_normal_form(G: BrunoField):
    for Q in G.terms:
        if not dot(Q, G.lam).is_zero():
            raise NotNormalFormError(f"nonresonant degree {Q} stored in claimed normal form")


# ---------------------------------------------------------------------------
# Nilpotency of the transport operator


@dataclass(frozen=True)
class NilpotencyReport:
    nilpotent: bool
    witness: tuple | None = None  # (basis degree, coordinate, offending degree)

    def __bool__(self):
        return self.nilpotent


def nilpotency_check(G_star, N: int, field=None, n=None) -> NilpotencyReport:
    """Apply the transport operator of G_* twice to every monomial vector
    field of order <= N; nilpotent when all results vanish (truncated
    at N).

    Under the coefficient-shape condition with isoresonance this must hold:
    <P, G_P> = 0 for every stored P kills the double application.
    """
    terms = G_star.terms if isinstance(G_star, BrunoField) else dict(G_star)
    if not terms:
        return NilpotencyReport(nilpotent=True)
    if field is None or n is None:
        some_vec = next(iter(terms.values()))
        field = some_vec[0].field
        n = len(some_vec)
    for Q in admissible_exponents(n, N):
        for i in range(n):
            if Q[i] == -1 or all(q >= 0 for q in Q):
                unit = tuple(field.one if j == i else field.zero for j in range(n))
                basis = {Q: unit}
                once = delta_apply_maps(terms, basis, N)
                if not once:
                    continue
                twice = delta_apply_maps(terms, once, N)
                if twice:
                    S = min(twice, key=deglex_key)
                    return NilpotencyReport(nilpotent=False, witness=(Q, i, S))
    return NilpotencyReport(nilpotent=True)


# ---------------------------------------------------------------------------
# Closed-form homological solution


def closed_form_homological(G_star: dict, F_star_delta: dict, delta: Scalar,
                            delta_js, D: Decomposition, m: int,
                            N: int | None = None) -> dict:
    """The closed-form window solution

        h_delta = [delta (1 + sum_j a_j s_j)]^{-1}
                  (Id + [delta (1 + sum_j a_j s_j)]^{-1} Delta_{G_*})
                  Pr(F_*_delta),

    with a_j = delta_j / delta, valid when the shape condition holds for
    G_* (which makes the transport operator square to zero, so the
    operator inverse terminates after one correction).  Exactly equal to
    the generic per-eigenvalue solve on such instances.
    """
    if delta.is_zero():
        raise InvalidInputError("closed form requires a nonzero eigenvalue")
    field = D.field
    n = D.n
    hi = min(2 * m - 1, N) if N is not None else 2 * m - 1
    # extract the direction series from G_* by exact span solves
    s_series = [dict() for _ in range(D.r)]
    for P, vec in G_star.items():
        sol = D.solve_span(vec)
        if sol is None:
            raise InvalidInputError(
                f"G_* coefficient at {P} is outside the decomposition span")
        for j, b in enumerate(sol):
            if not b.is_zero():
                s_series[j][P] = b
    alphas = [dj / delta for dj in delta_js]
    u = sr.sone(field, n)
    for a, s in zip(alphas, s_series):
        if not a.is_zero() and s:
            sr.siadd(u, sr.sscale(s, a))
    inv_u = sr.geometric_inverse(u, field, n, hi)
    scale = sr.sscale(inv_u, delta.inverse())  # 1 / (delta (1 + sum a_j s_j))
    w = {Q: v for Q, v in F_star_delta.items() if sum(Q) <= hi}
    delta_w = delta_apply_maps(G_star, w, hi)
    inner = dict(w)
    if delta_w:
        inner = tm_add(inner, series_times_field(scale, delta_w, hi))
    return series_times_field(scale, inner, hi)


# ---------------------------------------------------------------------------
# Majorant norms


def _coeff_abs_bound(s: Scalar, prec=128) -> Bound:
    lo, hi = s.abs_bounds(prec)
    return Bound(max(lo, mpq(0)), hi)


def majorant_norm(obj, rho) -> Bound:
    """Weighted absolute-coefficient sum: sum |a_Q| rho^order(Q).

    For vector data the coefficient contributes its entrywise absolute sum;
    the linear part of a full field enters at weight rho^0.  Bounds are
    exact-rational and directed outward.
    """
    rho = to_mpq(rho)
    if not 0 < rho <= 1:
        raise InvalidInputError("weight rho must satisfy 0 < rho <= 1")
    total = Bound.zero()
    if isinstance(obj, dict) and obj and not isinstance(next(iter(obj.values())), tuple):
        # scalar series
        for M, c in obj.items():
            total = total + _coeff_abs_bound(c).scale(rho ** abs(sum(M)))
        return total
    for Q, vec in all_terms(obj) if not isinstance(obj, dict) else obj.items():
        w = rho ** abs(sum(Q))
        for c in vec:
            total = total + _coeff_abs_bound(c).scale(w)
    return total


def delta_majorant_norm(terms, rho) -> Bound:
    """Entry sum of the weighted norms of the transport-operator matrix.

    Entry (i, j) of the matrix is sum_P G_P^(i) p_j x^(P + e_i - e_j), so
    the total collapses to sum_P |G_P|_1 |P|_1 rho^order(P).
    """
    rho = to_mpq(rho)
    if isinstance(terms, BrunoField):
        terms = terms.terms
    total = Bound.zero()
    for P, vec in terms.items():
        size = sum(abs(p) for p in P)
        if size == 0:
            continue
        w = rho ** abs(sum(P))
        for c in vec:
            total = total + _coeff_abs_bound(c).scale(w * size)
    return total


def jacobian_majorant_norm(terms, rho) -> Bound:
    """Weighted norm of the full Jacobian matrix: sum_P |G_P|_1 (1 + |P|_1) rho^|P|."""
    rho = to_mpq(rho)
    if isinstance(terms, BrunoField):
        terms = terms.terms
    total = Bound.zero()
    for P, vec in terms.items():
        size = 1 + sum(abs(p) for p in P)
        w = rho ** abs(sum(P))
        for c in vec:
            total = total + _coeff_abs_bound(c).scale(w * size)
    return total


# ---------------------------------------------------------------------------
# Step estimate


@dataclass
class MajorantReport:
    rho: mpq
    m: int
    hypothesis_met: bool
    norms: dict
    c1: mpq | None = None
    c2: mpq | None = None
    per_delta: list = dc_field(default_factory=list)
    aggregate: tuple | None = None  # (|h| upper, c2/omega^2 lower, ok)
    note: str = ""

    @property
    def all_bounds_hold(self):
        return self.hypothesis_met and self.aggregate is not None and self.aggregate[2] \
            and all(ok for *_r, ok in self.per_delta)


def _sigma_min_lower(vectors, prec=192) -> mpq:
    """Certified lower bound of the smallest singular value of the matrix
    with the decomposition directions as columns (via det H / tr H^(r-1)
    on the Gram matrix H)."""
    r = len(vectors)
    n = len(vectors[0])
    boxes = [[x.embed(prec) for x in v] for v in vectors]
    gram = [[None] * r for _ in range(r)]
    for a in range(r):
        for b in range(r):
            acc = None
            for i in range(n):
                term = boxes[a][i].conjugate() * boxes[b][i]
                acc = term if acc is None else acc + term
            gram[a][b] = acc
    det = _box_det(gram)
    det_lo = _box_re_bounds(det)[0]
    tr_hi = mpq(0)
    for a in range(r):
        tr_hi += _box_re_bounds(gram[a][a])[1]
    if det_lo <= 0 or tr_hi <= 0:
        return mpq(0)
    sigma_sq_lo = det_lo / max(tr_hi, mpq(1)) ** (r - 1) if r > 1 else det_lo
    return sqrt_bounds(sigma_sq_lo)[0]


def _box_det(mat):
    r = len(mat)
    if r == 1:
        return mat[0][0]
    acc = None
    for j in range(r):
        minor = [row[:j] + row[j + 1:] for row in mat[1:]]
        term = mat[0][j] * _box_det(minor)
        if j % 2 == 1:
            term = -term
        acc = term if acc is None else acc + term
    return acc


def independence_margin(D: Decomposition, prec=192) -> mpq:
    """Certified positive lower bound beta of min ||Lam v||_1 over the unit
    1-sphere: beta >= sigma_min / sqrt(r)."""
    sigma_lo = _sigma_min_lower(D.vectors, prec)
    if sigma_lo <= 0:
        return mpq(0)
    sqrt_r_hi = sqrt_bounds(mpq(D.r))[1]
    return sigma_lo / sqrt_r_hi


def step_estimate_check(F: BrunoField, D: Decomposition, rho, k: int,
                        hull_c=None, hull_B: int = 32) -> MajorantReport:
    """Check the hypotheses and conclusions of the single-step size bound.

    With m = 2^k and the input in partial normal form below m, verifies
    |F|_rho < 1 and |G_*|_rho, |Delta_G_*|_rho < c1 = beta / (2 r c),
    computes the block transform h, and checks the per-eigenvalue bound

        |h_delta|_rho <= (2/|d|) (n + 2 c1/|d|) |F_*_delta|_rho

    and the aggregate |h|_rho < c2 / omega_{k+1}^2 with
    c2 = 2 (n omega_1 + 2 c1).  All comparisons use outward-rounded
    rational bounds; a failed hypothesis is reported, not raised.
    """
    rho = to_mpq(rho)
    if not mpq(1, 2) < rho <= 1:
        raise InvalidInputError("the step estimate needs 1/2 < rho <= 1")
    m = 2 ** k
    lam = F.lam
    for Q in F.terms:
        if sum(Q) <= m - 1 and not dot(Q, lam).is_zero():
            raise NotInPartialNormalFormError(Q)
    g_star = {Q: v for Q, v in F.terms.items() if sum(Q) <= m - 1}
    f_star = {Q: v for Q, v in F.terms.items() if sum(Q) >= m}
    norms = {
        "F": majorant_norm(F, rho),
        "G_star": majorant_norm(g_star, rho) if g_star else Bound.zero(),
        "Delta_G_star": delta_majorant_norm(g_star, rho) if g_star else Bound.zero(),
    }
    hull = check_hull(tuple(lam), D, c=hull_c, B=hull_B)
    if not hull.ok:
        return MajorantReport(rho=rho, m=m, hypothesis_met=False, norms=norms,
                              note=f"hull comparison not available: {hull.kind}")
    beta = independence_margin(D)
    if beta <= 0:
        return MajorantReport(rho=rho, m=m, hypothesis_met=False, norms=norms,
                              note="independence margin not certified")
    c1 = beta / (2 * D.r * hull.c)
    hypothesis = (norms["F"].hi < 1 and norms["G_star"].hi < c1
                  and norms["Delta_G_star"].hi < c1)
    if not hypothesis:
        return MajorantReport(rho=rho, m=m, hypothesis_met=False, norms=norms, c1=c1,
                              note="size hypothesis not met at this rho")
    om = omega_sequence(lam, k + 1)
    omega1_lo = om.entries[0].lower
    omega_next_hi = om.entries[k].upper
    c2 = 2 * (F.n * omega1_lo + 2 * c1)
    res = block_step(F, m)
    h = res.h
    per_delta = []
    groups: dict = {}
    for Q, vec in h.h.items():
        groups.setdefault(dot(Q, lam), {})[Q] = vec
    f_groups: dict = {}
    for Q, vec in f_star.items():
        f_groups.setdefault(dot(Q, lam), {})[Q] = vec
    all_ok = True
    for delta, h_part in sorted(groups.items(), key=lambda kv: deglex_key(min(kv[1], key=deglex_key))):
        lhs = majorant_norm(h_part, rho).hi
        d_hi = delta.abs_bounds(192)[1]
        f_norm_lo = majorant_norm(f_groups.get(delta, {}), rho).lo if delta in f_groups else mpq(0)
        rhs_lo = (2 / d_hi) * (F.n + 2 * c1 / d_hi) * f_norm_lo
        ok = lhs <= rhs_lo
        per_delta.append((repr(delta), lhs, rhs_lo, ok))
        all_ok = all_ok and ok
    h_norm_hi = majorant_norm(h.h, rho).hi
    agg_rhs_lo = c2 / (omega_next_hi * omega_next_hi)
    aggregate = (h_norm_hi, agg_rhs_lo, h_norm_hi < agg_rhs_lo)
    return MajorantReport(rho=rho, m=m, hypothesis_met=True, norms=norms,
                          c1=c1, c2=c2, per_delta=per_delta, aggregate=aggregate)
