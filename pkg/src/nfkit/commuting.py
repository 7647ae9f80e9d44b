"""Simultaneous normalization of pairwise commuting vector fields.

A family of fields sharing one coordinate system commutes exactly when,
degree by degree, the compatibility relations

    <Q, lam^(k)> F_Q^(l) = <Q, lam^(l)> F_Q^(k)

hold between its members.  One shared near-identity substitution then
removes a jointly nonresonant degree from every member at once; the
eliminating member is chosen with the largest divisor magnitude, which
keeps all the ratios delta_i / delta_k bounded by one in the closed-form
window solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from gmpy2 import mpq

from .coeff import compare_magnitudes, max_precision
from .brunovf import (
    PointTransform,
    bracket,
    bracket_maps,
    compose_transforms,
    deglex_key,
    dot,
    substitute,
    tm_add,
    tm_clean,
    vec_is_zero,
    vec_scale,
)
from .conditions import Decomposition, _rank, _solve_span, nilpotency_check, closed_form_homological
from .errors import (
    DimensionMismatchError,
    InvalidInputError,
    NotACommutingFamilyError,
    NotInPartialNormalFormError,
    NotNormalFormError,
)
from .normalize import StepRecord, verify_conjugation
from .resonance import ResonanceContext, admissible_exponents, order


class CommutingFamily:
    """Fields F^(1..s) with linearly independent diagonal linear parts."""

    def __init__(self, fields):
        fields = tuple(fields)
        if not fields:
            raise InvalidInputError("empty family")
        f0 = fields[0]
        for F in fields:
            if F.n != f0.n or F.field != f0.field or F.trunc_order != f0.trunc_order:
                raise DimensionMismatchError("family members must share n, field and order")
        self.fields = fields
        self.s = len(fields)
        self.n = f0.n
        self.field = f0.field
        self.trunc_order = f0.trunc_order
        self.lams = tuple(F.lam for F in fields)
        if _rank(self.lams, self.field) != self.s:
            raise InvalidInputError("family linear parts are linearly dependent")

    def joint_weights(self, Q):
        return tuple(dot(Q, lam) for lam in self.lams)

    def is_joint_resonant(self, Q) -> bool:
        return all(dot(Q, lam).is_zero() for lam in self.lams)

    def with_fields(self, fields):
        return CommutingFamily(fields)

    def __iter__(self):
        return iter(self.fields)


@dataclass(frozen=True)
class CommuteReport:
    ok: bool
    pair: tuple | None = None
    exponent: tuple | None = None

    def __bool__(self):
        return self.ok


def check_commute(family: CommutingFamily, N: int | None = None) -> CommuteReport:
    """All pairwise brackets vanish up to order N (exact)."""
    N = family.trunc_order if N is None else N
    for a in range(family.s):
        for b in range(a + 1, family.s):
            br = bracket(family.fields[a], family.fields[b])
            live = sorted((Q for Q in br if order(Q) <= N), key=deglex_key)
            if live:
                return CommuteReport(ok=False, pair=(a, b), exponent=live[0])
    return CommuteReport(ok=True)


# ---------------------------------------------------------------------------
# Simultaneous elimination


@dataclass
class SimultaneousBlockResult:
    family: CommutingFamily
    h: PointTransform
    records: list

    def __iter__(self):
        return iter((self.family, self.h))


def _largest_divisor_index(deltas, max_prec=None) -> int:
    """Index of the divisor of largest magnitude; ties break to smaller index."""
    cap = max_prec or max_precision()
    best = None
    for k, d in enumerate(deltas):
        if d.is_zero():
            continue
        if best is None or compare_magnitudes(d, deltas[best], cap) > 0:
            best = k
    if best is None:
        raise InvalidInputError("all divisors vanish at a claimed nonresonant degree")
    return best


def simultaneous_block_step(family: CommutingFamily, m: int) -> SimultaneousBlockResult:
    """One shared transform taking the family from joint normal form below
    m to joint normal form through min(2m-1, N).

    The compatibility relations are asserted at every processed degree
    before elimination: their failure proves the family does not commute
    and is reported with the witness (Q, k, l).
    """
    if m < 1:
        raise InvalidInputError("block start order must be >= 1")
    hi = min(2 * m - 1, family.trunc_order)
    zerovec = tuple(family.field.zero for _ in range(family.n))
    for F in family.fields:
        for Q in F.terms:
            if sum(Q) <= m - 1 and not family.is_joint_resonant(Q):
                raise NotInPartialNormalFormError(Q)
    bases = []
    windows = []
    for F in family.fields:
        base = {Q: v for Q, v in F.terms.items() if sum(Q) <= m - 1}
        base[(0,) * family.n] = F.lam
        bases.append(base)
        windows.append({Q: v for Q, v in F.terms.items() if m <= sum(Q) <= hi})
    h_map: dict = {}
    records = []
    while True:
        live = set()
        for w in windows:
            live.update(Q for Q in w if not family.is_joint_resonant(Q))
        if not live:
            break
        Q = min(live, key=deglex_key)
        deltas = family.joint_weights(Q)
        coeffs = [w.get(Q, zerovec) for w in windows]
        for a in range(family.s):
            for b in range(a + 1, family.s):
                lhs = vec_scale(coeffs[b], deltas[a])
                rhs = vec_scale(coeffs[a], deltas[b])
                if lhs != rhs:
                    raise NotACommutingFamilyError((Q, a, b))
        k = _largest_divisor_index(deltas)
        if vec_is_zero(coeffs[k]):
            raise AssertionError("compatibility forces a zero degree to be dead")
        h_term = vec_scale(coeffs[k], deltas[k].inverse())
        h_map[Q] = h_term
        records.append(StepRecord(degree=Q, delta=deltas[k], action="eliminate", block=m))
        for i in range(family.s):
            update = bracket_maps({Q: h_term}, bases[i], hi)
            windows[i] = tm_clean(tm_add(windows[i], update))
            if Q in windows[i]:
                raise AssertionError(f"shared elimination left member {i} dirty at {Q}")
    h = PointTransform(family.field, family.n, h_map, family.trunc_order)
    if h.is_identity():
        return SimultaneousBlockResult(family=family, h=h, records=records)
    new_fields = [substitute(F, h) for F in family.fields]
    for i, F in enumerate(new_fields):
        for Q in F.terms:
            if sum(Q) <= hi and not family.is_joint_resonant(Q):
                raise AssertionError(f"member {i} nonresonant at {Q} after shared step")
    return SimultaneousBlockResult(family=CommutingFamily(new_fields), h=h,
                                   records=records)


@dataclass
class SimultaneousResult:
    family: CommutingFamily
    transform: PointTransform
    log: list
    verifications: list  # ConjugationReport per member


def simultaneous_normalize(family: CommutingFamily, N: int | None = None) -> SimultaneousResult:
    """Normalize every member with one shared transform, blockwise.

    Postconditions checked before returning: each member passes the exact
    conjugation identity under the same transform, the members still
    commute pairwise up to N, and every stored degree up to N is jointly
    resonant.
    """
    N = family.trunc_order if N is None else N
    com = check_commute(family, N)
    if not com.ok:
        raise NotACommutingFamilyError((com.exponent, *com.pair))
    original = family
    H = PointTransform.identity(family.field, family.n, family.trunc_order)
    log: list = []
    m = 1
    while m <= N:
        res = simultaneous_block_step(family, m)
        family = res.family
        log.extend(res.records)
        if not res.h.is_identity():
            H = compose_transforms(H, res.h)
        m *= 2
    verifications = []
    for F0, F1 in zip(original.fields, family.fields):
        rep = verify_conjugation(F0, H, F1, N=original.trunc_order)
        if not rep.ok:
            raise AssertionError(f"member conjugation failed at {rep.first_offender}")
        verifications.append(rep)
    final = check_commute(family, N)
    if not final.ok:
        raise AssertionError(f"members stopped commuting at {final.exponent}")
    return SimultaneousResult(family=family, transform=H, log=log,
                              verifications=verifications)


# ---------------------------------------------------------------------------
# Shape condition for families


@dataclass
class ALReport:
    holds: bool
    witness: tuple | None          # (member k, degree P, coefficient) on failure
    v_series: dict                 # (i, k) -> series dict P -> Scalar

    def __bool__(self):
        return self.holds


def check_AL(family: CommutingFamily, N: int | None = None) -> ALReport:
    """Every jointly resonant coefficient of every member lies in the span
    of the family's linear parts; extracts the multiplier series v_ik with

        G^(k) = sum_i (1{i=k} + v_ik) lam^(i) (.) x.
    """
    N = family.trunc_order if N is None else N
    for k, F in enumerate(family.fields):
        for Q in F.terms:
            if sum(Q) <= N and not family.is_joint_resonant(Q):
                raise NotNormalFormError(
                    f"member {k} carries a jointly nonresonant degree {Q}")
    v_series = {(i, k): {} for i in range(family.s) for k in range(family.s)}
    for k, F in enumerate(family.fields):
        for P, vec in sorted(F.terms.items(), key=lambda kv: deglex_key(kv[0])):
            sol = _solve_span(family.lams, vec, family.field)
            if sol is None:
                return ALReport(holds=False, witness=(k, P, vec), v_series=v_series)
            for i, b in enumerate(sol):
                if not b.is_zero():
                    v_series[(i, k)][P] = b
    return ALReport(holds=True, witness=None, v_series=v_series)


# ---------------------------------------------------------------------------
# Joint small-divisor sequence


@dataclass(frozen=True)
class OmegaSharpEntry:
    p: int
    lower: mpq
    upper: mpq
    member: int
    per_member: tuple  # (lower, upper, argmin Q) per k


@dataclass
class OmegaSharpSequence:
    entries: list
    partial_sum_upper: float
    note: str = "max over members of the per-member divisor minima"


def omega_sharp(lams, p_max: int, max_prec=None) -> OmegaSharpSequence:
    """Per level p: for each member the minimum nonzero divisor magnitude
    over orders < 2^p, then the maximum across members.

    Shares one enumeration pass across all members.
    """
    ctxs = [ResonanceContext(lam) for lam in lams]
    cap = max_prec or max_precision()
    n = ctxs[0].n
    if any(c.n != n for c in ctxs):
        raise DimensionMismatchError("members live in different dimensions")
    top = 2 ** p_max - 1
    best = [None] * len(ctxs)   # (Q, scalar, float upper)
    entries = []
    level = 1

    def close_level(p):
        per = []
        for k, b in enumerate(best):
            if b is None:
                raise InvalidInputError(f"member {k} has no nonzero divisor below 2^{p}")
            lo, hi = b[1].abs_bounds(128)
            per.append((lo, hi, b[0]))
        # max over members, certified; ties keep the smaller index
        kbest = 0
        for k in range(1, len(per)):
            if compare_magnitudes(best[k][1], best[kbest][1], cap) > 0:
                kbest = k
        return OmegaSharpEntry(p=p, lower=per[kbest][0], upper=per[kbest][1],
                               member=kbest, per_member=tuple(per))

    for Q in admissible_exponents(n, top):
        v = order(Q)
        while v >= 2 ** level:
            entries.append(close_level(level))
            level += 1
        for k, ctx in enumerate(ctxs):
            if ctx.is_resonant(Q):
                continue
            box = ctx.weight_box(Q, 53)
            if best[k] is not None and box.abs_lo() > best[k][2]:
                continue
            w = ctx.weight(Q)
            if best[k] is None or compare_magnitudes(w, best[k][1], cap) < 0:
                best[k] = (Q, w, float(box.abs_hi()))
    while level <= p_max:
        entries.append(close_level(level))
        level += 1
    psum = 0.0
    for e in entries:
        lo = float(e.lower)
        psum += max(0.0, -math.log(lo)) / (2 ** e.p)
    return OmegaSharpSequence(entries=entries, partial_sum_upper=psum)


# ---------------------------------------------------------------------------
# Closed-form window solution for families


def al_closed_form(family: CommutingFamily, delta_bar, f_star_block: dict,
                   m: int, k: int | None = None, N: int | None = None):
    """Window solution for the joint eigenvalue tuple delta_bar, computed
    through member k (largest divisor by default, so all ratios
    delta_i / delta_k have magnitude at most one).

    Returns (k, h) where h solves member k's window equation; nilpotency
    of the member's transport operator is verified first.
    """
    N = family.trunc_order if N is None else N
    hi = min(2 * m - 1, N)
    if k is None:
        k = _largest_divisor_index(delta_bar)
    delta_k = delta_bar[k]
    if delta_k.is_zero():
        raise InvalidInputError("chosen member has vanishing divisor")
    F = family.fields[k]
    g_star = {Q: v for Q, v in F.terms.items() if sum(Q) <= m - 1}
    nil = nilpotency_check(g_star, N, field=family.field, n=family.n)
    if not nil.nilpotent:
        raise InvalidInputError(f"member {k} transport operator is not nilpotent: {nil.witness}")
    gammas = [family.field.one if i == k else family.field.zero for i in range(family.s)]
    D_k = Decomposition(family.lams[k], family.lams, gammas)
    h = closed_form_homological(g_star, f_star_block, delta_k, delta_bar, D_k, m, N=N)
    return k, h
