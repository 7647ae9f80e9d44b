"""The normalization engine.

Implements the classical elimination loop for a vector field with diagonal
linear part: walk the terms in degree-lex order, keep the resonant ones,
and remove each nonresonant term of degree S by the near-identity
substitution with h = (y (.) F_S) y^S / <S, lam>, which cancels the term
exactly and leaves everything below S untouched.  On top of the termwise
step sit the blockwise doubling step (orders m..2m-1 at once), the full
driver in three modes, the per-eigenvalue homological solver, and the
exact conjugation-identity verifier used as the engine's postcondition.
"""

from __future__ import annotations

from dataclasses import dataclass

from .brunovf import (
    BrunoField,
    PointTransform,
    _compose_components,
    _dh_matrix,
    bracket_maps,
    compose_transforms,
    deglex_key,
    dot,
    is_admissible,
    substitute,
    tm_add,
    tm_clean,
    to_component_series,
    vec_is_zero,
    vec_scale,
)
from .errors import (
    InconsistentSystemError,
    InvalidInputError,
    NotInPartialNormalFormError,
)
from . import series as sr


# ---------------------------------------------------------------------------
# Reports


@dataclass(frozen=True)
class StepRecord:
    degree: tuple
    delta: object  # Scalar
    action: str    # eliminate | keep_resonant | solve_h | solve_g
    block: int | None = None


@dataclass(frozen=True)
class ConjugationReport:
    ok: bool
    first_offender: tuple | None = None
    coordinate: int | None = None

    def __bool__(self):
        return self.ok


@dataclass
class NormalizationResult:
    normal_form: BrunoField
    transform: PointTransform
    log: list
    mode: str
    verification: ConjugationReport

    def resonant_support(self):
        return sorted(self.normal_form.terms, key=deglex_key)


@dataclass
class TermStepResult:
    field: BrunoField
    h: PointTransform | None
    frontier: tuple | None
    done: bool

    def __iter__(self):
        return iter((self.field, self.h))


@dataclass
class BlockStepResult:
    field: BrunoField
    h: PointTransform
    records: list

    def __iter__(self):
        return iter((self.field, self.h))


# ---------------------------------------------------------------------------
# Conjugation identity


def conjugation_sides(F: BrunoField, H: PointTransform, G: BrunoField):
    """Component series of DH(y) G(y) and of F(H(y)), truncated alike."""
    n = F.n
    cap = min(F.trunc_order, G.trunc_order, H.trunc_order) + 1
    gcomps = to_component_series(G)
    if H.is_identity():
        lhs = gcomps
    else:
        dh = _dh_matrix(H, cap)
        lhs = []
        for i in range(n):
            acc = dict(gcomps[i])
            for j in range(n):
                if dh[i][j] and gcomps[j]:
                    sr.siadd(acc, sr.smul(dh[i][j], gcomps[j], cap))
            lhs.append(acc)
    rhs = _compose_components(to_component_series(F), to_component_series(H), n, cap)
    return lhs, rhs


def verify_conjugation(F: BrunoField, H: PointTransform, G: BrunoField,
                       N: int | None = None) -> ConjugationReport:
    """Exact comparison of DH(y) G(y) with F(H(y)) up to order N."""
    if not (F.n == H.n == G.n):
        raise InvalidInputError("dimension mismatch in conjugation check")
    if N is None:
        N = min(F.trunc_order, G.trunc_order, H.trunc_order)
    cap = N + 1
    lhs, rhs = conjugation_sides(F, H, G)
    offenders = []
    for i in range(F.n):
        diff = sr.sadd(sr.struncate(lhs[i], cap), sr.sneg(sr.struncate(rhs[i], cap)))
        for M in diff:
            Q = tuple(m - (1 if j == i else 0) for j, m in enumerate(M))
            offenders.append((Q, i))
    if not offenders:
        return ConjugationReport(ok=True)
    offenders.sort(key=lambda t: (deglex_key(t[0]), t[1]))
    return ConjugationReport(ok=False, first_offender=offenders[0][0],
                             coordinate=offenders[0][1])


# ---------------------------------------------------------------------------
# Termwise step


def _smallest_after(terms, frontier, up_to):
    best = None
    fkey = deglex_key(frontier) if frontier is not None else None
    for Q in terms:
        if sum(Q) > up_to:
            continue
        k = deglex_key(Q)
        if fkey is not None and k <= fkey:
            continue
        if best is None or k < deglex_key(best):
            best = Q
    return best


def term_step(F: BrunoField, frontier=None, up_to=None) -> TermStepResult:
    """One step of the elimination walk.

    The field is assumed to be in normal form up to the frontier degree.
    If the smallest stored term past the frontier is resonant the frontier
    just advances; otherwise that term is removed by its canonical
    near-identity substitution, leaving all smaller degrees unchanged.
    """
    up_to = F.trunc_order if up_to is None else up_to
    S = _smallest_after(F.terms, frontier, up_to)
    if S is None:
        return TermStepResult(field=F, h=None, frontier=frontier, done=True)
    delta = dot(S, F.lam)
    if delta.is_zero():
        return TermStepResult(field=F, h=None, frontier=S, done=False)
    coeff = vec_scale(F.terms[S], delta.inverse())
    h = PointTransform.single_term(F.field, F.n, F.trunc_order, S, coeff)
    F2 = substitute(F, h)
    return TermStepResult(field=F2, h=h, frontier=S, done=False)


# ---------------------------------------------------------------------------
# Blockwise step


def _window_hi(F, m):
    return min(2 * m - 1, F.trunc_order)


def block_step(F: BrunoField, m: int) -> BlockStepResult:
    """Extend a normal form from orders < m to orders <= min(2m-1, N).

    Requires the input to be in normal form up to order m - 1.  The
    eliminating terms h_i are found by walking the window degree by
    degree; bookkeeping between sub-steps uses the exact low-order update
    F + [h_i, A + G_*] (valid below order 2m), and the returned field is
    recomputed from the single substitution x = y + sum h_i, which agrees
    with the sub-step composite on the whole window.  The resonant part of
    the window is inherited from the input tail unchanged.
    """
    if m < 1:
        raise InvalidInputError("block start order must be >= 1")
    hi = _window_hi(F, m)
    lam = F.lam
    for Q in F.terms:
        if sum(Q) <= m - 1 and not dot(Q, lam).is_zero():
            raise NotInPartialNormalFormError(Q)
    # A + G_*: the frozen bracket partner for the low-order updates
    base = {Q: v for Q, v in F.terms.items() if sum(Q) <= m - 1}
    base[(0,) * F.n] = lam
    window = {Q: v for Q, v in F.terms.items() if m <= sum(Q) <= hi}
    h_map: dict = {}
    records = []
    while True:
        live = [Q for Q, v in window.items() if not dot(Q, lam).is_zero()]
        if not live:
            break
        S = min(live, key=deglex_key)
        delta = dot(S, lam)
        coeff = vec_scale(window[S], delta.inverse())
        h_map[S] = coeff
        records.append(StepRecord(degree=S, delta=delta, action="eliminate", block=m))
        update = bracket_maps({S: coeff}, base, hi)
        window = tm_clean(tm_add(window, update))
        if S in window:
            raise AssertionError("elimination failed to cancel its own degree")
    h = PointTransform(F.field, F.n, h_map, F.trunc_order)
    if h.is_identity():
        return BlockStepResult(field=F, h=h, records=records)
    F2 = substitute(F, h)
    for Q in F2.terms:
        if sum(Q) <= hi and not dot(Q, lam).is_zero():
            raise AssertionError(f"window degree {Q} still nonresonant after block step")
    return BlockStepResult(field=F2, h=h, records=records)


# ---------------------------------------------------------------------------
# Homological solver


@dataclass
class HomologicalSolution:
    per_delta: dict  # Scalar -> term map
    h: dict          # merged term map


def homological_solve(G_star: dict, F_star: dict, lam, m: int,
                      N: int | None = None) -> HomologicalSolution:
    """Solve, per nonzero eigenvalue delta of the linear action, the window
    equation

        delta h_delta + Pr([G_*, h_delta]) = Pr(F_*_delta)

    over orders m..min(2m-1, N).  The bracket raises order, so the system
    is triangular in the order filtration and the solution is unique.
    """
    field = lam[0].field
    n = len(lam)
    hi = min(2 * m - 1, N) if N is not None else 2 * m - 1
    for Q in G_star:
        if not dot(Q, lam).is_zero():
            raise InconsistentSystemError(f"G_* carries a nonresonant degree {Q}")
        if not 1 <= sum(Q) <= m - 1:
            raise InconsistentSystemError(f"G_* order at {Q} outside [1, m-1]")
    for Q in F_star:
        if sum(Q) < m:
            raise InconsistentSystemError(f"F_* order at {Q} below m = {m}")
    groups: dict = {}
    for Q, vec in F_star.items():
        if sum(Q) > hi:
            continue
        delta = dot(Q, lam)
        if delta.is_zero():
            continue
        groups.setdefault(delta, {})[Q] = vec
    per_delta = {}
    merged: dict = {}
    for delta, rhs in sorted(groups.items(), key=lambda kv: deglex_key(min(kv[1], key=deglex_key))):
        inv = delta.inverse()
        h_delta: dict = {}
        for ell in range(m, hi + 1):
            resid = {Q: v for Q, v in rhs.items() if sum(Q) == ell}
            if h_delta:
                br = bracket_maps(G_star, h_delta, hi)
                resid = tm_add(resid, {Q: v for Q, v in tm_neg_map(br).items() if sum(Q) == ell})
            for Q, vec in tm_clean(resid).items():
                h_delta[Q] = vec_scale(vec, inv)
        h_delta = tm_clean(h_delta)
        per_delta[delta] = h_delta
        merged = tm_add(merged, h_delta)
    return HomologicalSolution(per_delta=per_delta, h=merged)


def tm_neg_map(tm: dict) -> dict:
    return {Q: tuple(-c for c in v) for Q, v in tm.items()}


# ---------------------------------------------------------------------------
# Full drivers


MODES = ("termwise", "blockwise", "distinguished")


def normalize(F: BrunoField, N: int | None = None, mode: str = "blockwise") -> NormalizationResult:
    """Normalize to order N in the requested mode.

    All modes return a pair (G, H) passing the exact conjugation identity;
    the normal forms themselves may differ between modes beyond the
    resonant support, as normal forms are not unique.
    """
    if mode not in MODES:
        raise InvalidInputError(f"unknown mode {mode!r}; expected one of {MODES}")
    if N is None:
        N = F.trunc_order
    if not 1 <= N <= F.trunc_order:
        raise InvalidInputError(f"target order {N} outside [1, {F.trunc_order}]")
    if mode == "distinguished":
        return solve_distinguished(F, N)
    H = PointTransform.identity(F.field, F.n, F.trunc_order)
    log: list = []
    G = F
    if mode == "termwise":
        frontier = None
        while True:
            step = term_step(G, frontier, up_to=N)
            if step.done:
                break
            frontier = step.frontier
            delta = dot(step.frontier, G.lam)
            if step.h is None:
                log.append(StepRecord(degree=step.frontier, delta=delta,
                                      action="keep_resonant"))
            else:
                log.append(StepRecord(degree=step.frontier, delta=delta,
                                      action="eliminate"))
                H = compose_transforms(H, step.h)
            G = step.field
    else:
        m = 1
        while m <= N:
            res = block_step(G, m)
            G = res.field
            log.extend(res.records)
            if not res.h.is_identity():
                H = compose_transforms(H, res.h)
            m *= 2
    report = verify_conjugation(F, H, G, N=F.trunc_order)
    if not report.ok:
        raise AssertionError(f"conjugation identity failed at {report.first_offender}")
    _assert_normal(G, N)
    return NormalizationResult(normal_form=G, transform=H, log=log, mode=mode,
                               verification=report)


def _assert_normal(G: BrunoField, N: int):
    for Q in G.terms:
        if sum(Q) <= N and not dot(Q, G.lam).is_zero():
            raise AssertionError(f"nonresonant degree {Q} survived normalization")


def solve_distinguished(F: BrunoField, N: int | None = None) -> NormalizationResult:
    """Degree-by-degree solve of DH G = F o H with resonant H-coefficients
    pinned to zero.

    At each order the unknowns decouple: a nonresonant degree S determines
    h_S = E_S / <S, lam> and a resonant one determines G_S = E_S, where E
    is the defect of the identity with all lower orders already matched.
    The resulting transform is the unique one free of resonant terms.
    """
    if N is None:
        N = F.trunc_order
    if not 1 <= N <= F.trunc_order:
        raise InvalidInputError(f"target order {N} outside [1, {F.trunc_order}]")
    field, n = F.field, F.n
    lam = F.lam
    h_map: dict = {}
    g_terms: dict = {}
    log: list = []
    for ell in range(1, N + 1):
        G = BrunoField(field, n, lam, g_terms, F.trunc_order, _validate=False)
        H = PointTransform(field, n, h_map, F.trunc_order, _validate=False)
        lhs, rhs = conjugation_sides(F, H, G)
        defects: dict = {}
        for i in range(n):
            diff = sr.sadd(rhs[i], sr.sneg(lhs[i]))
            for M, c in diff.items():
                deg = sum(M)
                if deg != ell + 1:
                    if deg <= ell:
                        raise AssertionError(
                            f"defect at already-matched order {deg - 1}")
                    continue
                Q = tuple(x - (1 if j == i else 0) for j, x in enumerate(M))
                vec = defects.get(Q)
                if vec is None:
                    vec = [field.zero] * n
                    defects[Q] = vec
                vec[i] = vec[i] + c
        for Q in sorted(defects, key=deglex_key):
            vec = tuple(defects[Q])
            if vec_is_zero(vec):
                continue
            if not is_admissible(Q):
                raise AssertionError(f"defect outside the exponent cone at {Q}")
            delta = dot(Q, lam)
            if delta.is_zero():
                g_terms[Q] = vec
                log.append(StepRecord(degree=Q, delta=delta, action="solve_g"))
            else:
                h_map[Q] = vec_scale(vec, delta.inverse())
                log.append(StepRecord(degree=Q, delta=delta, action="solve_h"))
    G = BrunoField(field, n, lam, g_terms, F.trunc_order)
    H = PointTransform(field, n, h_map, F.trunc_order)
    report = verify_conjugation(F, H, G, N=N)
    if not report.ok:
        raise AssertionError(f"conjugation identity failed at {report.first_offender}")
    _assert_normal(G, N)
    return NormalizationResult(normal_form=G, transform=H, log=log,
                               mode="distinguished", verification=report)
