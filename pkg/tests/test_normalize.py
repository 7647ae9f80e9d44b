"""The normalization engine: termwise and blockwise steps, the full
drivers, the homological solver, and the conjugation verifier."""

import pytest
from gmpy2 import mpq

from nfkit.brunovf import (
    BrunoField,
    PointTransform,
    bracket_maps,
    deglex_key,
    dot,
    from_monomials,
    project,
    tm_add,
    tm_clean,
)
from nfkit.normalize import (
    MODES,
    block_step,
    homological_solve,
    normalize,
    solve_distinguished,
    term_step,
    tm_neg_map,
    verify_conjugation,
)
from nfkit.errors import NotInPartialNormalFormError
from nfkit.resonance import resonant_exponents

from conftest import random_bruno_field, random_point_transform, rng_for


class TestTermStep:
    def test_resonant_skipped(self, Q):
        F = from_monomials(Q, 2, 6, [1, 2], [(1, (2, 0), 1)])
        step = term_step(F)
        assert step.h is None and step.field == F and step.frontier == (2, -1)

    def test_nonresonant_removed_exactly(self, Q):
        F = from_monomials(Q, 2, 6, [1, 3], [(1, (2, 0), 1)])
        step = term_step(F)
        assert step.h.h == {(2, -1): (Q.zero, -Q.one)}
        assert step.field.terms == {}

    def test_zero_weight_pair(self, Q):
        lam = [Q.scalar(1), Q.scalar(-1)]
        F = BrunoField(Q, 2, lam, {(1, 1): (Q.one, Q.zero)}, 6)
        step = term_step(F)
        assert step.h is None and step.field == F

    def test_frontier_monotone(self, Q):
        rng = rng_for("frontier")
        lam = [Q.scalar(1), Q.scalar(-2)]
        for _ in range(10):
            F = random_bruno_field(Q, lam, 6, rng, nterms=4)
            frontier = None
            G = F
            while True:
                step = term_step(G, frontier)
                if step.done:
                    break
                if step.h is not None:
                    # degrees strictly before the processed one are untouched
                    for Q_ in step.field.terms:
                        if deglex_key(Q_) < deglex_key(step.frontier):
                            assert step.field.terms[Q_] == G.terms[Q_]
                    assert step.frontier not in step.field.terms
                frontier = step.frontier
                G = step.field


class TestBlockStep:
    def test_already_normal(self, Q):
        lam = (Q.scalar(1), Q.scalar(-1))
        F = BrunoField(Q, 2, lam, {(1, 1): (Q.one, -Q.one)}, 6)
        res = block_step(F, 2)
        assert res.h.is_identity() and res.field == F

    def test_precondition_enforced(self, Q):
        F = from_monomials(Q, 2, 6, [1, 3], [(1, (2, 0), 1)])  # nonresonant order 1
        with pytest.raises(NotInPartialNormalFormError) as exc:
            block_step(F, 4)
        assert exc.value.exponent == (2, -1)

    def test_contract_randomized(self, Q, Qi):
        # orders of h within the window; low orders fixed; resonant window
        # part inherited from the input tail
        cases = [(Q, [1, -1]), (Q, [1, 2]), (Qi, [[0, 1], [0, -1]])]
        count = 0
        for field, lam_lit in cases:
            rng = rng_for(f"block-{lam_lit}")
            lam = [field.scalar(x) for x in lam_lit]
            for _ in range(12):
                N = rng.choice([5, 6, 7])
                m = rng.choice([1, 2, 3])
                F = random_bruno_field(field, lam, N, rng, nterms=4)
                # force partial normal form below m
                F = F.with_terms({Q_: v for Q_, v in F.terms.items()
                                  if sum(Q_) >= m or dot(Q_, F.lam).is_zero()})
                res = block_step(F, m)
                hi = min(2 * m - 1, N)
                if not res.h.is_identity():
                    assert m <= res.h.min_order() and res.h.max_order() <= hi
                for Q_, v in F.terms.items():
                    if sum(Q_) <= m - 1:
                        assert res.field.terms.get(Q_) == v
                for Q_ in set(F.terms) | set(res.field.terms):
                    if m <= sum(Q_) <= hi and dot(Q_, F.lam).is_zero():
                        assert res.field.terms.get(Q_) == F.terms.get(Q_)
                for Q_ in res.field.terms:
                    if sum(Q_) <= hi:
                        assert dot(Q_, F.lam).is_zero()
                count += 1
        assert count >= 36

    def test_block_h_solves_window_equation(self, Q):
        # delta h_delta + Pr([G_*, h_delta]) = Pr(F_*_delta) per eigenvalue
        rng = rng_for("block-homological")
        lam = (Q.scalar(1), Q.scalar(-1))
        for _ in range(8):
            F, _, m = _partial_instance(Q, lam, rng)
            res = block_step(F, m)
            hi = min(2 * m - 1, F.trunc_order)
            g_star = {Q_: v for Q_, v in F.terms.items() if sum(Q_) <= m - 1}
            groups = {}
            for Q_, v in res.h.h.items():
                groups.setdefault(dot(Q_, lam), {})[Q_] = v
            for delta, h_delta in groups.items():
                lhs = {Q_: tuple(delta * c for c in v) for Q_, v in h_delta.items()}
                br = bracket_maps(g_star, h_delta, hi)
                lhs = tm_clean(tm_add(lhs, br))
                rhs = {Q_: v for Q_, v in F.terms.items()
                       if m <= sum(Q_) <= hi and dot(Q_, lam) == delta}
                assert lhs == tm_clean(rhs)


def _partial_instance(field, lam, rng, N=7):
    """Random field in partial normal form below a random block start."""
    m = rng.choice([2, 3])
    F = random_bruno_field(field, lam, N, rng, nterms=5)
    kept = {}
    for Q_, v in F.terms.items():
        if sum(Q_) >= m or dot(Q_, F.lam).is_zero():
            kept[Q_] = v
    return F.with_terms(kept), None, m


class TestHomologicalSolve:
    def test_trivial_division(self, Q):
        lam = (Q.scalar(1), Q.scalar(3))
        f_star = {(2, 0): (Q.one, Q.scalar(2))}  # weight 2 + 0 = ... <(2,0),(1,3)> = 2
        sol = homological_solve({}, f_star, lam, 2, N=7)
        delta = dot((2, 0), lam)
        assert sol.h == {(2, 0): (Q.one / delta, Q.scalar(2) / delta)}

    def test_solution_satisfies_equation(self, Q):
        rng = rng_for("homsolve")
        lam = (Q.scalar(1), Q.scalar(-1))
        for _ in range(10):
            F, _, m = _partial_instance(Q, lam, rng)
            hi = min(2 * m - 1, F.trunc_order)
            g_star = {Q_: v for Q_, v in F.terms.items() if sum(Q_) <= m - 1}
            f_star = {Q_: v for Q_, v in F.terms.items() if sum(Q_) >= m}
            sol = homological_solve(g_star, f_star, lam, m, N=F.trunc_order)
            for delta, h_delta in sol.per_delta.items():
                lhs = {Q_: tuple(delta * c for c in v) for Q_, v in h_delta.items()}
                lhs = tm_clean(tm_add(lhs, bracket_maps(g_star, h_delta, hi)))
                rhs = {Q_: v for Q_, v in f_star.items()
                       if sum(Q_) <= hi and dot(Q_, lam) == delta}
                assert lhs == tm_clean(rhs)

    def test_matches_block_step(self, Q, Qi):
        for field, lam_lit in ((Q, [1, -1]), (Qi, [[0, 1], [0, -1]])):
            rng = rng_for(f"hom-block-{lam_lit}")
            lam = tuple(field.scalar(x) for x in lam_lit)
            for _ in range(8):
                F, _, m = _partial_instance(field, lam, rng)
                res = block_step(F, m)
                g_star = {Q_: v for Q_, v in F.terms.items() if sum(Q_) <= m - 1}
                f_star = {Q_: v for Q_, v in F.terms.items() if sum(Q_) >= m}
                sol = homological_solve(g_star, f_star, lam, m, N=F.trunc_order)
                assert tm_clean(sol.h) == tm_clean(res.h.h)


class TestNormalize:
    def test_linear_input(self, Q):
        A = BrunoField.linear(Q, [1, 3], 6)
        for mode in MODES:
            r = normalize(A, mode=mode)
            assert r.normal_form == A
            assert r.transform.is_identity()
            assert r.verification.ok

    def test_fold_example(self, Q):
        # <(-1,2),(1,2)> = 3: the x2^2 e1 term is removable
        F = from_monomials(Q, 2, 6, [1, 2], [(1, (0, 2), 0)])
        for mode in MODES:
            r = normalize(F, mode=mode)
            assert all(dot(Q_, r.normal_form.lam).is_zero() for Q_ in r.normal_form.terms)
            assert r.verification.ok

    def test_modes_all_verify(self, Q, Qi):
        for field, lam_lit in ((Q, [1, 2]), (Q, [1, -1]), (Qi, [[0, 1], [0, -1]])):
            rng = rng_for(f"modes-{lam_lit}")
            lam = [field.scalar(x) for x in lam_lit]
            for _ in range(5):
                F = random_bruno_field(field, lam, 5, rng, nterms=3)
                supports = {}
                for mode in MODES:
                    r = normalize(F, mode=mode)
                    assert r.verification.ok
                    assert all(dot(Q_, r.normal_form.lam).is_zero()
                               for Q_ in r.normal_form.terms
                               if sum(Q_) <= F.trunc_order)
                    supports[mode] = set(r.normal_form.terms)
                # supports are logged, not asserted equal: normal forms are
                # not unique; record mismatches for inspection
                _ = supports

    def test_partial_order_target(self, Q):
        rng = rng_for("partial-N")
        F = random_bruno_field(Q, [Q.scalar(1), Q.scalar(3)], 6, rng, nterms=4)
        r = normalize(F, N=3, mode="termwise")
        for Q_ in r.normal_form.terms:
            if sum(Q_) <= 3:
                assert dot(Q_, r.normal_form.lam).is_zero()


class TestDistinguished:
    def test_linear(self, Q):
        A = BrunoField.linear(Q, [1, 3], 6)
        r = solve_distinguished(A)
        assert r.transform.is_identity() and r.normal_form == A

    def test_single_step_example(self, Q):
        F = from_monomials(Q, 2, 6, [1, 3], [(1, (2, 0), 1)])
        r = solve_distinguished(F)
        assert r.normal_form.terms == {}
        assert r.transform.h == {(2, -1): (Q.zero, -Q.one)}

    def test_support_disjoint_from_resonances(self, Q, Qi):
        for field, lam_lit in ((Q, [1, 2]), (Q, [1, -1]), (Qi, [[0, 1], [0, -1]])):
            rng = rng_for(f"disting-{lam_lit}")
            lam = [field.scalar(x) for x in lam_lit]
            for _ in range(6):
                F = random_bruno_field(field, lam, 6, rng, nterms=3)
                r = solve_distinguished(F)
                resonant = set(resonant_exponents(r.normal_form.lam, F.trunc_order))
                assert not (set(r.transform.h) & resonant)
                assert r.verification.ok

    def test_deterministic(self, Q):
        rng = rng_for("disting-det")
        F = random_bruno_field(Q, [Q.scalar(1), Q.scalar(-1)], 6, rng, nterms=4)
        r1 = solve_distinguished(F)
        r2 = solve_distinguished(F)
        assert repr(r1.normal_form) == repr(r2.normal_form)
        assert repr(r1.transform) == repr(r2.transform)


class TestVerifyConjugation:
    def test_identity_passes(self, Q):
        rng = rng_for("verify-id")
        F = random_bruno_field(Q, [Q.scalar(1), Q.scalar(3)], 6, rng)
        I = PointTransform.identity(Q, 2, 6)
        assert verify_conjugation(F, I, F).ok

    def test_mutation_located(self, Q):
        F = from_monomials(Q, 2, 6, [1, 3], [(1, (2, 0), 1)])
        r = normalize(F, mode="termwise")
        h = dict(r.transform.h)
        Q0 = next(iter(h))
        # bump one coefficient in a slot the support rule allows
        neg = next((i for i, q in enumerate(Q0) if q == -1), None)
        slot = neg if neg is not None else 0
        vec = list(h[Q0])
        vec[slot] = vec[slot] + 1
        h[Q0] = tuple(vec)
        bad = PointTransform(Q, 2, h, 6)
        rep = verify_conjugation(F, bad, r.normal_form)
        assert not rep.ok
        assert rep.first_offender is not None

    def test_engine_results_pass(self, Q):
        rng = rng_for("verify-engine")
        for _ in range(5):
            F = random_bruno_field(Q, [Q.scalar(1), Q.scalar(2)], 6, rng, nterms=3)
            for mode in MODES:
                r = normalize(F, mode=mode)
                assert verify_conjugation(F, r.transform, r.normal_form,
                                          N=r.normal_form.trunc_order if mode != "distinguished" else None).ok
