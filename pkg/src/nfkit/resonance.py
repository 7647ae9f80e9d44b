"""Exact resonance structure of the linear-part eigenvalues.

Everything here reduces resonance questions to integer linear algebra:
writing each eigenvalue over the rational basis of the coefficient field
gives a rational matrix E with ``<Q, lam> = 0`` exactly when E Q = 0, so
resonant exponents, the resonance lattice and small-divisor scans are all
decided exactly.  Magnitudes of nonzero divisors are handled through
certified enclosures with adaptive precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

from gmpy2 import lcm, mpq

from .coeff import Scalar, box_int_combination, compare_magnitudes, max_precision
from .brunovf import deglex_key, dot, order
from .errors import InvalidInputError


# ---------------------------------------------------------------------------
# Exponent enumeration


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def exponents_with_sum(n, s):
    """All admissible exponents with entry sum s (not sorted)."""
    if s >= 0:
        yield from _compositions(s, n)
    if s >= -1:
        for j in range(n):
            for rest in _compositions(s + 1, n - 1):
                yield rest[:j] + (-1,) + rest[j:]


def admissible_exponents(n, max_order, strict=False):
    """Admissible exponents of order <= max_order (< when strict), deglex sorted.

    Enumeration is finite: with at most one entry equal to -1, every entry
    is bounded by the entry sum plus one, so the shell of order v has at
    most (v + 2)^n elements.
    """
    top = max_order - 1 if strict else max_order
    for v in range(0, top + 1):
        shell = list(exponents_with_sum(n, v))
        if v == 1:
            shell.extend(exponents_with_sum(n, -1))
        shell.sort(key=deglex_key)
        yield from shell


# ---------------------------------------------------------------------------
# Context


def weight(Q, lam) -> Scalar:
    """The exact pairing <Q, lam> = sum q_i lam_i."""
    if len(Q) != len(lam):
        raise InvalidInputError("exponent and eigenvalue vector lengths differ")
    return dot(Q, lam)


class ResonanceContext:
    """Eigenvalue vector together with its rational expansion matrix.

    ``<Q, lam> = 0`` holds exactly when Q lies in the integer kernel of the
    expansion matrix, which is cleared to an integer matrix row by row.
    """

    def __init__(self, lam):
        lam = tuple(lam)
        if not lam:
            raise InvalidInputError("empty eigenvalue vector")
        self.field = lam[0].field
        self.lam = lam
        self.n = len(lam)
        m = self.field.m
        self.expansion = [[s.coeffs[r] for s in lam] for r in range(m)]
        self.int_matrix = []
        for row in self.expansion:
            den = 1
            for c in row:
                den = lcm(den, c.denominator)
            irow = [int(c * den) for c in row]
            if any(irow):
                self.int_matrix.append(irow)
        self._box_cache = {}

    def weight(self, Q) -> Scalar:
        return dot(Q, self.lam)

    def is_resonant(self, Q) -> bool:
        return all(sum(a * q for a, q in zip(row, Q)) == 0 for row in self.int_matrix)

    def lam_boxes(self, prec):
        boxes = self._box_cache.get(prec)
        if boxes is None:
            boxes = [s.embed(prec) for s in self.lam]
            if prec <= 53:           # machine-float path for hot scans
                boxes = [b.to_float() for b in boxes]
            self._box_cache[prec] = boxes
        return boxes

    def weight_box(self, Q, prec=53):
        return box_int_combination(self.lam_boxes(prec), Q, prec)


def resonant_exponents(lam, bound):
    """All admissible Q with order <= bound and <Q, lam> = 0, deglex sorted."""
    if bound < 0:
        raise InvalidInputError("order bound must be >= 0")
    ctx = lam if isinstance(lam, ResonanceContext) else ResonanceContext(lam)
    return [Q for Q in admissible_exponents(ctx.n, bound) if ctx.is_resonant(Q)]


# ---------------------------------------------------------------------------
# Integer kernel (resonance lattice)


@dataclass(frozen=True)
class LatticeBasis:
    """Basis of the integer kernel of the expansion matrix, in row HNF."""

    basis: tuple
    rank: int

    def __iter__(self):
        return iter(self.basis)


def _kernel_columns(M, n):
    """Column-style elimination: returns basis of {Q : M Q = 0} over Z."""
    A = [list(row) for row in M]
    U = [[1 if i == j else 0 for j in range(n)] for i in range(n)]  # columns tracked

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in U:
            row[i], row[j] = row[j], row[i]

    def addmul_col(dst, src, q):
        for row in A:
            row[dst] += q * row[src]
        for row in U:
            row[dst] += q * row[src]

    col = 0
    for r in range(len(A)):
        while True:
            live = [j for j in range(col, n) if A[r][j] != 0]
            if not live:
                break
            piv = min(live, key=lambda j: (abs(A[r][j]), j))
            if piv != col:
                swap_cols(col, piv)
            done = True
            for j in range(col + 1, n):
                if A[r][j] != 0:
                    q = -(A[r][j] // A[r][col])
                    addmul_col(j, col, q)
                    if A[r][j] != 0:
                        done = False
            if done:
                col += 1
                break
    return [tuple(U[i][j] for i in range(n)) for j in range(col, n)]


def _hnf_rows(vectors):
    """Row Hermite normal form with positive pivots; canonical basis."""
    rows = [list(v) for v in vectors]
    if not rows:
        return []
    n = len(rows[0])
    out = []
    pivot_col = 0
    r = 0
    while r < len(rows) and pivot_col < n:
        live = [i for i in range(r, len(rows)) if rows[i][pivot_col] != 0]
        if not live:
            pivot_col += 1
            continue
        # reduce all live rows against the minimal one until a single pivot remains
        while True:
            live = [i for i in range(r, len(rows)) if rows[i][pivot_col] != 0]
            if len(live) <= 1:
                break
            live.sort(key=lambda i: (abs(rows[i][pivot_col]), i))
            base = live[0]
            for i in live[1:]:
                q = rows[i][pivot_col] // rows[base][pivot_col]
                rows[i] = [a - q * b for a, b in zip(rows[i], rows[base])]
        live = [i for i in range(r, len(rows)) if rows[i][pivot_col] != 0]
        if live:
            i = live[0]
            rows[r], rows[i] = rows[i], rows[r]
            if rows[r][pivot_col] < 0:
                rows[r] = [-a for a in rows[r]]
            for i in range(r):
                q = rows[i][pivot_col] // rows[r][pivot_col]
                if q:
                    rows[i] = [a - q * b for a, b in zip(rows[i], rows[r])]
            r += 1
        pivot_col += 1
    return [tuple(row) for row in rows[:r]]


def lattice(lam) -> LatticeBasis:
    """Integer basis of the resonance lattice {Q in Z^n : <Q, lam> = 0}.

    The kernel of an integer matrix is saturated, so membership of any
    integer vector can be tested directly against the expansion matrix.
    """
    ctx = lam if isinstance(lam, ResonanceContext) else ResonanceContext(lam)
    raw = _kernel_columns(ctx.int_matrix, ctx.n)
    basis = _hnf_rows(raw)
    return LatticeBasis(tuple(basis), len(basis))


# ---------------------------------------------------------------------------
# Small-divisor sequences


@dataclass(frozen=True)
class OmegaEntry:
    k: int
    lower: mpq
    upper: mpq
    argmin: tuple
    exact: bool


@dataclass
class OmegaSequence:
    """Certified minima of |<Q, lam>| over nonresonant Q of order < 2^k."""

    entries: list
    partial_sum_upper: float
    note: str = dc_field(default=(
        "finite scan: the summability of the full series is not decidable "
        "from finitely many minima"))

    def values(self):
        return [(e.lower, e.upper) for e in self.entries]


def omega_sequence(lam, k_max, max_prec=None) -> OmegaSequence:
    """Scan the divisor minima for k = 1..k_max.

    Enumeration covers about (2^k + 2)^n exponents at level k; the default
    CLI limits (n <= 4, k_max <= 5) keep this tractable.  Resonant Q are
    excluded exactly; magnitude comparisons run through exact squared
    magnitudes where the field permits and certified enclosures otherwise,
    with the deglex-smaller exponent kept on unresolved ties.
    """
    ctx = lam if isinstance(lam, ResonanceContext) else ResonanceContext(lam)
    cap = max_prec or max_precision()
    top = 2 ** k_max - 1
    best_q = None
    best_w = None
    best_hi_f = math.inf
    entries = []
    level = 1
    pending = admissible_exponents(ctx.n, top)
    for Q in pending:
        v = order(Q)
        while v >= 2 ** level:
            entries.append(_omega_entry(level, best_q, best_w))
            level += 1
        if ctx.is_resonant(Q):
            continue
        # cheap certified screen before the exact comparison
        box = ctx.weight_box(Q, 53)
        if box.abs_lo() > best_hi_f:
            continue
        w = ctx.weight(Q)
        if best_w is None or compare_magnitudes(w, best_w, cap) < 0:
            best_q, best_w = Q, w
            best_hi_f = float(box.abs_hi())
    while level <= k_max:
        entries.append(_omega_entry(level, best_q, best_w))
        level += 1
    psum = 0.0
    for e in entries:
        lo = float(e.lower)
        if lo <= 0:
            raise InvalidInputError("omega entry with nonpositive lower bound")
        psum += max(0.0, -math.log(lo)) / (2 ** e.k)
    return OmegaSequence(entries=entries, partial_sum_upper=psum)


def _omega_entry(k, best_q, best_w, max_prec=None):
    if best_w is None:
        raise InvalidInputError(
            f"no nonresonant exponent of order < {2 ** k}; omega_{k} undefined")
    cap = max_prec or max_precision()
    prec = 128
    while True:
        lo, hi = best_w.abs_bounds(prec)
        if lo > 0 or prec >= cap:
            break
        prec *= 2  # the weight is exactly nonzero; refinable
    return OmegaEntry(k=k, lower=lo, upper=hi, argmin=best_q, exact=(lo == hi))


# ---------------------------------------------------------------------------
# Polynomial lower bounds for nonzero divisors


@dataclass(frozen=True)
class SiegelPlissCertificate:
    """Constants (C, nu) with |<Q, lam>| >= C |Q|^-nu for all nonzero weights.

    Produced from the norm argument over all field embeddings: clearing
    denominators makes the weights algebraic integers, whose norms are
    nonzero rational integers; bounding the conjugate factors by
    (Cstar |Q|) each leaves the designated one bounded below.
    """

    C: mpq
    nu: int
    Cstar: mpq
    denominator_clearing: int
    scan_bound: int | None = None
    scan_checked: int | None = None

    def bound_at(self, Q) -> mpq:
        size = sum(abs(q) for q in Q)
        return self.C / mpq(size) ** self.nu if size else self.C


def siegel_pliss_certificate(lam, scan_bound=None, prec=128) -> SiegelPlissCertificate:
    ctx = lam if isinstance(lam, ResonanceContext) else ResonanceContext(lam)
    fld = ctx.field
    m = fld.m
    nu = m - 1
    n_den = 1
    for s in ctx.lam:
        for c in s.coeffs:
            n_den = lcm(n_den, c.denominator)
    n_den = int(n_den)
    cstar = mpq(0)
    if nu > 0:
        for s in ctx.lam:
            for box in s.all_embeddings(prec):
                hi = box.abs_bounds_mpq()[1]
                if hi > cstar:
                    cstar = hi
        cstar = cstar * (1 + mpq(1, 1 << 20))  # strictly above the true maximum
    else:
        cstar = mpq(1)
    C = 1 / (mpq(n_den) ** m * cstar ** nu)
    checked = None
    if scan_bound is not None:
        checked = _verify_certificate(ctx, C, nu, scan_bound)
    return SiegelPlissCertificate(C=C, nu=nu, Cstar=cstar,
                                  denominator_clearing=n_den,
                                  scan_bound=scan_bound, scan_checked=checked)


def _verify_certificate(ctx, C, nu, bound, max_prec=None):
    """Certified check of |w| |Q|^nu >= C on every nonzero weight up to bound."""
    cap = max_prec or max_precision()
    c_f = float(C) * (1.0 + 1e-12)
    checked = 0
    for Q in admissible_exponents(ctx.n, bound):
        if ctx.is_resonant(Q):
            continue
        checked += 1
        size = sum(abs(q) for q in Q)
        scale = mpq(size) ** nu
        box = ctx.weight_box(Q, 53)
        if box.abs_lo() * float(scale) > c_f:
            continue
        w = ctx.weight(Q)
        prec = 96
        while True:
            lo, hi = w.abs_bounds(prec)
            if lo * scale >= C:
                break
            if hi * scale < C:
                raise InvalidInputError(
                    f"certificate violated at {Q}: |w| |Q|^nu in "
                    f"[{float(lo * scale)}, {float(hi * scale)}] < C = {float(C)}")
            if prec >= cap:
                raise InvalidInputError(f"certificate check unresolved at {Q}")
            prec *= 2
    return checked
