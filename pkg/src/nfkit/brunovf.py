"""Sparse truncated formal vector fields in Hadamard form and their Lie calculus.

A vector field is stored as a diagonal linear part ``lam`` plus an
exponent-keyed map of nonlinear terms::

    F(x) = lam (.) x  +  sum_Q (x (.) F_Q) x^Q

where ``(.)`` is the componentwise (Hadamard) product, ``F_Q`` is a vector
of scalars and the exponents Q range over the admissible cone: integer
vectors with at most one entry equal to -1 and all others >= 0.  The order
of a term is ``|q_1 + ... + q_n|``; stored nonlinear terms always have
entry sum >= 1.  Near-identity substitutions x = y + h(y) are stored the
same way, without a linear part.

All operations are exact and truncate at the field's fixed order bound;
products above the bound are never materialized.
"""

from __future__ import annotations

from .coeff import Scalar
from .errors import DimensionMismatchError, FieldMismatchError, InvalidInputError
from . import series as sr


# ---------------------------------------------------------------------------
# Exponents

def order(Q) -> int:
    """The order |q_1 + ... + q_n| of a degree Q."""
    return abs(sum(Q))


def is_admissible(Q) -> bool:
    """Membership in the exponent cone: at most one -1, all others >= 0."""
    negs = 0
    for q in Q:
        if q == -1:
            negs += 1
        elif q < 0:
            return False
    return negs <= 1


def deglex_key(Q):
    """Sort key for the degree-lexicographic order (x_1 > ... > x_n).

    P precedes Q when the first nonzero entry of
    (|Q| - |P|, q_1 - p_1, ..., q_{n-1} - p_{n-1}) is positive; the final
    entry breaks the remaining ties between opposite-sum shells.
    """
    return (order(Q),) + tuple(Q[:-1]) + (Q[-1],)


def dot(Q, vec) -> Scalar:
    """Exact pairing sum_i q_i * v_i of an integer vector with scalars."""
    field = vec[0].field
    acc = None
    for q, s in zip(Q, vec):
        if q == 0:
            continue
        term = tuple(q * c for c in s.coeffs)
        acc = term if acc is None else field._add(acc, term)
    return field.zero if acc is None else Scalar(field, acc)


# ---------------------------------------------------------------------------
# Coefficient-vector helpers

def vec_is_zero(vec) -> bool:
    return all(s.is_zero() for s in vec)


def vec_add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def vec_scale(vec, s):
    return tuple(s * x for x in vec)


def _check_support(Q, vec):
    for i, q in enumerate(Q):
        if q == -1:
            for j, c in enumerate(vec):
                if j != i and not c.is_zero():
                    raise InvalidInputError(
                        f"coefficient at degree {Q} must be supported on "
                        f"coordinate {i} only")


def tm_clean(tm: dict) -> dict:
    return {Q: vec for Q, vec in tm.items() if not vec_is_zero(vec)}


def tm_add(a: dict, b: dict) -> dict:
    out = dict(a)
    for Q, vec in b.items():
        cur = out.get(Q)
        v = vec if cur is None else vec_add(cur, vec)
        if vec_is_zero(v):
            out.pop(Q, None)
        else:
            out[Q] = v
    return out


def tm_neg(a: dict) -> dict:
    return {Q: tuple(-c for c in vec) for Q, vec in a.items()}


def tm_sorted(a: dict):
    return sorted(a.items(), key=lambda kv: deglex_key(kv[0]))


# ---------------------------------------------------------------------------
# The two stored shapes


class BrunoField:
    """Truncated formal vector field with diagonal linear part."""

    __slots__ = ("field", "n", "lam", "terms", "trunc_order")

    def __init__(self, field, n, lam, terms, trunc_order, _validate=True):
        self.field = field
        self.n = n
        self.lam = tuple(field.scalar(x) for x in lam)
        self.trunc_order = trunc_order
        if len(self.lam) != n:
            raise DimensionMismatchError("linear part has wrong length")
        if trunc_order < 1:
            raise InvalidInputError("truncation order must be >= 1")
        if _validate:
            terms = tm_clean(terms)
            for Q, vec in terms.items():
                if len(Q) != n or len(vec) != n:
                    raise DimensionMismatchError(f"term {Q} has wrong arity")
                if not is_admissible(Q):
                    raise InvalidInputError(f"degree {Q} outside the exponent cone")
                s = sum(Q)
                if s < 1:
                    raise InvalidInputError(
                        f"degree {Q} has order {abs(s)} with entry sum {s}; "
                        "only the diagonal linear part may sit below order 1")
                if s > trunc_order:
                    raise InvalidInputError(f"degree {Q} exceeds truncation order {trunc_order}")
                _check_support(Q, vec)
        self.terms = terms

    @classmethod
    def linear(cls, field, lam, trunc_order):
        lam = tuple(field.scalar(x) for x in lam)
        return cls(field, len(lam), lam, {}, trunc_order)

    def with_terms(self, terms, validate=True):
        return BrunoField(self.field, self.n, self.lam, terms, self.trunc_order,
                          _validate=validate)

    def sorted_terms(self):
        return tm_sorted(self.terms)

    def terms_in_orders(self, lo, hi) -> dict:
        """Order-interval filter of the nonlinear terms."""
        return {Q: v for Q, v in self.terms.items() if lo <= sum(Q) <= hi}

    def __eq__(self, other):
        return (isinstance(other, BrunoField) and self.field == other.field
                and self.n == other.n and self.lam == other.lam
                and self.trunc_order == other.trunc_order
                and tm_clean(self.terms) == tm_clean(other.terms))

    def __repr__(self):
        rows = [f"BrunoField(n={self.n}, N={self.trunc_order}, lam={list(self.lam)})"]
        for Q, vec in self.sorted_terms():
            rows.append(f"  {Q}: {list(vec)}")
        return "\n".join(rows)


class PointTransform:
    """Near-identity substitution x = y + h(y), stored as the term map of h."""

    __slots__ = ("field", "n", "h", "trunc_order")

    def __init__(self, field, n, h, trunc_order, _validate=True):
        self.field = field
        self.n = n
        self.trunc_order = trunc_order
        if _validate:
            h = tm_clean(h)
            for Q, vec in h.items():
                if len(Q) != n or len(vec) != n:
                    raise DimensionMismatchError(f"term {Q} has wrong arity")
                if not is_admissible(Q):
                    raise InvalidInputError(f"degree {Q} outside the exponent cone")
                if sum(Q) < 1:
                    raise InvalidInputError("substitution must be near-identity (orders >= 1)")
                if sum(Q) > trunc_order:
                    raise InvalidInputError(f"degree {Q} exceeds truncation order {trunc_order}")
                _check_support(Q, vec)
        self.h = h

    @classmethod
    def identity(cls, field, n, trunc_order):
        return cls(field, n, {}, trunc_order)

    @classmethod
    def single_term(cls, field, n, trunc_order, Q, vec):
        return cls(field, n, {tuple(Q): tuple(vec)}, trunc_order)

    def is_identity(self) -> bool:
        return not self.h

    def min_order(self):
        return min((sum(Q) for Q in self.h), default=None)

    def max_order(self):
        return max((sum(Q) for Q in self.h), default=None)

    def with_terms(self, h, validate=True):
        return PointTransform(self.field, self.n, h, self.trunc_order, _validate=validate)

    def sorted_terms(self):
        return tm_sorted(self.h)

    def __eq__(self, other):
        return (isinstance(other, PointTransform) and self.field == other.field
                and self.n == other.n and self.trunc_order == other.trunc_order
                and tm_clean(self.h) == tm_clean(other.h))

    def __repr__(self):
        rows = [f"PointTransform(n={self.n}, N={self.trunc_order})"]
        for Q, vec in self.sorted_terms():
            rows.append(f"  {Q}: {list(vec)}")
        return "\n".join(rows)


def _shape_of(obj):
    if isinstance(obj, BrunoField):
        return obj.field, obj.n, obj.trunc_order
    if isinstance(obj, PointTransform):
        return obj.field, obj.n, obj.trunc_order
    raise InvalidInputError(f"expected a field or a transform, got {type(obj).__name__}")


def _check_compatible(U, V):
    fu, nu, Nu = _shape_of(U)
    fv, nv, Nv = _shape_of(V)
    if nu != nv:
        raise DimensionMismatchError(f"dimension mismatch: {nu} vs {nv}")
    if fu != fv:
        raise FieldMismatchError("operands from different coefficient fields")
    return fu, nu, min(Nu, Nv)


def all_terms(obj):
    """Iterate (degree, coefficient vector), including the linear part."""
    if isinstance(obj, BrunoField):
        zero = (0,) * obj.n
        if not all(s.is_zero() for s in obj.lam):
            yield zero, obj.lam
        yield from obj.terms.items()
    elif isinstance(obj, PointTransform):
        yield from obj.h.items()
    else:
        yield from obj.items()


# ---------------------------------------------------------------------------
# Construction from classical vector monomials


def from_monomials(field, n, trunc_order, lam, entries) -> BrunoField:
    """Build a field from monomial data (coeff, exponent m >= 0, coordinate k).

    Each entry contributes ``coeff * x^m e_k``, converted to Hadamard form
    with degree Q = m - e_k; contributions at equal degree accumulate and
    exact cancellations are dropped.  Coordinates are 0-based.
    """
    terms: dict = {}
    for c, m, k in entries:
        c = field.scalar(c)
        m = tuple(int(x) for x in m)
        if len(m) != n:
            raise DimensionMismatchError(f"monomial exponent {m} has wrong length")
        if any(x < 0 for x in m):
            raise InvalidInputError(f"monomial exponent {m} must be componentwise >= 0")
        if not 0 <= k < n:
            raise InvalidInputError(f"coordinate index {k} out of range")
        deg = sum(m)
        if deg == 0:
            raise InvalidInputError("constant vector-field terms are not representable "
                                    "(the field must vanish at the origin)")
        if deg == 1:
            if m[k] == 1:
                raise InvalidInputError(
                    "degree-1 diagonal entries belong to the linear part; "
                    "pass them through lam")
            raise InvalidInputError(
                "off-diagonal linear terms are not allowed: the linear part "
                "must be diagonal")
        Q = tuple(x - (1 if i == k else 0) for i, x in enumerate(m))
        vec = terms.get(Q)
        if vec is None:
            vec = tuple(field.zero for _ in range(n))
        vec = tuple(v + c if i == k else v for i, v in enumerate(vec))
        if vec_is_zero(vec):
            terms.pop(Q, None)
        else:
            terms[Q] = vec
    return BrunoField(field, n, lam, terms, trunc_order)


# ---------------------------------------------------------------------------
# Lie calculus


def bracket_maps(tm_u: dict, tm_v: dict, N: int) -> dict:
    """Lie bracket of two raw term maps, truncated to orders <= N."""
    out: dict = {}
    for mu, theta in tm_u.items():
        smu = sum(mu)
        for nu, phi in tm_v.items():
            if smu + sum(nu) > N:
                continue
            a = dot(nu, theta)
            b = dot(mu, phi)
            if a.is_zero() and b.is_zero():
                continue
            vec = tuple(a * p - b * t for p, t in zip(phi, theta))
            if vec_is_zero(vec):
                continue
            S = tuple(x + y for x, y in zip(mu, nu))
            cur = out.get(S)
            v = vec if cur is None else vec_add(cur, vec)
            if vec_is_zero(v):
                out.pop(S, None)
            else:
                out[S] = v
    return tm_clean(out)


def bracket(U, V) -> dict:
    """Lie bracket [U, V](x) = DV(x) U(x) - DU(x) V(x) as a term map.

    Computed termwise: the product of terms at degrees mu and nu lands at
    mu + nu with coefficient <nu, theta> phi - <mu, phi> theta, so the
    grading is respected and truncation is exact.
    """
    field, n, N = _check_compatible(U, V)
    out = bracket_maps(dict(all_terms(U)), dict(all_terms(V)), N)
    for S in out:
        # the bracket of admissible data stays in the cone; a violation
        # here means corrupted inputs
        assert is_admissible(S), f"bracket left the exponent cone at {S}"
    return out


def delta_apply_maps(tm_u: dict, tm_v: dict, N: int) -> dict:
    """Raw-map version of the transport operator."""
    out: dict = {}
    for Q, Uq in tm_u.items():
        sq = sum(Q)
        for P, Vp in tm_v.items():
            if sq + sum(P) > N:
                continue
            w = dot(Q, Vp)
            if w.is_zero():
                continue
            S = tuple(x + y for x, y in zip(Q, P))
            vec = vec_scale(Uq, w)
            cur = out.get(S)
            v = vec if cur is None else vec_add(cur, vec)
            if vec_is_zero(v):
                out.pop(S, None)
            else:
                out[S] = v
    return tm_clean(out)


def delta_apply(U, V) -> dict:
    """The transport-part operator of U acting on V:

        Delta_U V = sum_{Q,P} <Q, V_P> (x (.) U_Q) x^(P+Q).

    Together with the bracket it satisfies [U, V] = Delta_V U - Delta_U V
    exactly.  Unlike the bracket, a single Delta term may leave the
    admissible cone; the result is therefore a raw term map.
    """
    field, n, N = _check_compatible(U, V)
    return delta_apply_maps(dict(all_terms(U)), dict(all_terms(V)), N)


def project(R, k: int):
    """Projection to orders <= k (terms of higher order dropped)."""
    if isinstance(R, BrunoField):
        if k > R.trunc_order:
            raise InvalidInputError(f"projection order {k} exceeds truncation {R.trunc_order}")
        return R.with_terms({Q: v for Q, v in R.terms.items() if sum(Q) <= k},
                            validate=False)
    if isinstance(R, PointTransform):
        if k > R.trunc_order:
            raise InvalidInputError(f"projection order {k} exceeds truncation {R.trunc_order}")
        return R.with_terms({Q: v for Q, v in R.h.items() if sum(Q) <= k},
                            validate=False)
    return {Q: v for Q, v in R.items() if order(Q) <= k}


def eigencomponent(R, mu, delta) -> dict:
    """Terms of R whose degree Q satisfies <Q, mu> = delta, exactly.

    The linear part belongs to the component at delta = 0.  Summing the
    components over all attained values reassembles R.
    """
    field = mu[0].field
    delta = field.scalar(delta)
    out = {}
    for Q, vec in all_terms(R):
        if dot(Q, mu) == delta:
            out[Q] = vec
    return out


def series_times_field(s: dict, terms, N: int) -> dict:
    """Multiply a scalar series into a term map: s_P * (x (.) W_Q) x^(P+Q)."""
    out: dict = {}
    for P, c in s.items():
        sp = sum(P)
        for Q, vec in all_terms(terms):
            if sp + sum(Q) > N:
                continue
            S = tuple(x + y for x, y in zip(P, Q))
            v = vec_scale(vec, c)
            cur = out.get(S)
            v = v if cur is None else vec_add(cur, v)
            if vec_is_zero(v):
                out.pop(S, None)
            else:
                out[S] = v
    return tm_clean(out)


# ---------------------------------------------------------------------------
# Substitution machinery (component-polynomial representation)


def to_component_series(obj):
    """Component polynomials as scalar series with nonnegative exponents.

    Component i of ``(x (.) F_Q) x^Q`` is ``F_Q^(i) x^(Q + e_i)``, which is
    an honest polynomial monomial whenever the coefficient support rule
    holds.  Transforms contribute their identity part.
    """
    field, n, N = _shape_of(obj)
    comps = [dict() for _ in range(n)]
    if isinstance(obj, PointTransform):
        for i in range(n):
            e = tuple(1 if j == i else 0 for j in range(n))
            comps[i][e] = field.one
    for Q, vec in all_terms(obj):
        for i, c in enumerate(vec):
            if c.is_zero():
                continue
            M = tuple(q + (1 if j == i else 0) for j, q in enumerate(Q))
            cur = comps[i].get(M)
            s = c if cur is None else cur + c
            if s.is_zero():
                comps[i].pop(M, None)
            else:
                comps[i][M] = s
    return comps


def from_component_series(field, n, trunc_order, comps, expect_lam=None) -> BrunoField:
    """Rebuild Hadamard form from component polynomials.

    The degree-1 part must be diagonal; when ``expect_lam`` is given it is
    checked exactly and stripped into the linear part.
    """
    terms: dict = {}
    lam = [field.zero] * n
    for i, comp in enumerate(comps):
        for M, c in comp.items():
            if c.is_zero():
                continue
            deg = sum(M)
            if deg == 0:
                raise InvalidInputError("constant component term produced; input was not "
                                        "a vector field vanishing at the origin")
            if deg == 1:
                if M[i] != 1:
                    raise InvalidInputError("off-diagonal linear term produced")
                lam[i] = lam[i] + c
                continue
            Q = tuple(m - (1 if j == i else 0) for j, m in enumerate(M))
            vec = terms.get(Q)
            if vec is None:
                vec = tuple(field.zero for _ in range(n))
            vec = tuple(v + c if j == i else v for j, v in enumerate(vec))
            terms[Q] = vec
    if expect_lam is not None and tuple(lam) != tuple(expect_lam):
        raise InvalidInputError("linear part changed under substitution")
    return BrunoField(field, n, lam, tm_clean(terms), trunc_order)


def _compose_components(comps, hcomps, n, cap):
    """Evaluate component polynomials at x = H(y), truncating at degree cap."""
    monomials = set()
    for comp in comps:
        monomials.update(comp)
    pow_cache = [dict() for _ in range(n)]

    def h_power(j, k):
        cache = pow_cache[j]
        got = cache.get(k)
        if got is not None:
            return got
        if k == 0:
            raise AssertionError("unused")
        if k == 1:
            val = hcomps[j]
        else:
            val = sr.smul(h_power(j, k - 1), hcomps[j], cap)
        cache[k] = val
        return val

    mono_cache = {}

    def eval_monomial(M):
        got = mono_cache.get(M)
        if got is not None:
            return got
        val = None
        for j, k in enumerate(M):
            if k == 0:
                continue
            p = h_power(j, k)
            val = p if val is None else sr.smul(val, p, cap)
        if val is None:
            raise InvalidInputError("constant monomial in a component polynomial")
        mono_cache[M] = val
        return val

    out = []
    for comp in comps:
        acc: dict = {}
        for M, c in comp.items():
            sr.siadd(acc, eval_monomial(M), scale=c)
        out.append(acc)
    return out


def _dh_matrix(H: PointTransform, cap):
    """Jacobian of the nonlinear part h as an n x n matrix of series."""
    n = H.n
    hcomps = to_component_series(H)
    mat = [[None] * n for _ in range(n)]
    for i in range(n):
        comp = dict(hcomps[i])
        e = tuple(1 if j == i else 0 for j in range(n))
        comp.pop(e, None)  # identity part differentiates away from h
        for j in range(n):
            mat[i][j] = sr.struncate(sr.sdiff(comp, j), cap)
    return mat


def substitute(F: BrunoField, H: PointTransform) -> BrunoField:
    """Transformed field under x = H(y): the unique solution of

        DH(y) Ftilde(y) = F(H(y))    modulo orders > N.

    Composition is evaluated termwise over cached powers of H; the Jacobian
    DH = Id + Dh is inverted by its Neumann series, which terminates
    because h has positive order.  The linear part is preserved exactly.
    """
    field, n, N = _check_compatible(F, H)
    cap = N + 1  # component polynomial degree bound for orders <= N
    comps = to_component_series(F)
    hcomps = to_component_series(H)
    composed = _compose_components(comps, hcomps, n, cap)
    if H.is_identity():
        solved = composed
    else:
        dh = _dh_matrix(H, cap)
        solved = [dict(c) for c in composed]
        cur = composed
        for _ in range(cap + 1):
            nxt = []
            for i in range(n):
                acc: dict = {}
                for j in range(n):
                    if dh[i][j] and cur[j]:
                        sr.siadd(acc, sr.smul(dh[i][j], cur[j], cap))
                nxt.append(sr.sneg(acc))
            cur = nxt
            if not any(cur):
                break
            for i in range(n):
                sr.siadd(solved[i], cur[i])
        else:
            raise AssertionError("Neumann inversion did not terminate")
    return from_component_series(field, n, N, solved, expect_lam=F.lam)


def compose_transforms(H1: PointTransform, H2: PointTransform) -> PointTransform:
    """The single substitution equivalent to applying H1 then H2.

    Sequential substitutions x = H1(u), u = H2(y) amount to x = H1(H2(y)),
    so the returned transform is H(y) = H1(H2(y)) truncated at order N;
    substitute(substitute(F, H1), H2) == substitute(F, compose_transforms(H1, H2))
    modulo orders > N.
    """
    field, n, N = _check_compatible(H1, H2)
    cap = N + 1
    comps1 = to_component_series(H1)
    comps2 = to_component_series(H2)
    composed = _compose_components(comps1, comps2, n, cap)
    h: dict = {}
    for i, comp in enumerate(composed):
        e = tuple(1 if j == i else 0 for j in range(n))
        for M, c in comp.items():
            if c.is_zero():
                continue
            if M == e:
                if c != field.one:
                    raise InvalidInputError("composition lost the identity part")
                continue
            if sum(M) <= 1:
                raise InvalidInputError("composition produced a non-near-identity term")
            Q = tuple(m - (1 if j == i else 0) for j, m in enumerate(M))
            vec = h.get(Q)
            if vec is None:
                vec = tuple(field.zero for _ in range(n))
            h[Q] = tuple(v + c if j == i else v for j, v in enumerate(vec))
    return PointTransform(field, n, tm_clean(h), N)
