"""Sparse exponent-keyed scalar series over the coefficient field.

Internal engine shared by substitution, the homological solvers and the
first-integral checks.  A series is a plain dict mapping integer exponent
tuples to nonzero :class:`~nfkit.coeff.Scalar` values.  The grading used
for truncation is the entry sum of the exponent, which is additive under
products; every series handled here has entry sums >= 0.
"""

from __future__ import annotations

from .errors import InconsistentSystemError


def szero() -> dict:
    return {}

def sone(field, n) -> dict:
    return {(0,) * n: field.one}

def sdeg(M) -> int:
    return sum(M)

def sclean(a: dict) -> dict:
    return {M: c for M, c in a.items() if not c.is_zero()}

def sadd(a: dict, b: dict) -> dict:
    out = dict(a)
    for M, c in b.items():
        cur = out.get(M)
        s = c if cur is None else cur + c
        if s.is_zero():
            out.pop(M, None)
        else:
            out[M] = s
    return out

def siadd(acc: dict, b: dict, scale=None) -> None:
    """In-place ``acc += scale * b`` (scale: Scalar or None)."""
    for M, c in b.items():
        v = c if scale is None else scale * c
        cur = acc.get(M)
        s = v if cur is None else cur + v
        if s.is_zero():
            acc.pop(M, None)
        else:
            acc[M] = s

def sneg(a: dict) -> dict:
    return {M: -c for M, c in a.items()}

def sscale(a: dict, s) -> dict:
    if s.is_zero():
        return {}
    return {M: s * c for M, c in a.items()}

def struncate(a: dict, cap: int) -> dict:
    return {M: c for M, c in a.items() if sum(M) <= cap}

def smul(a: dict, b: dict, cap: int) -> dict:
    """Product truncated to entry sums <= cap."""
    if not a or not b:
        return {}
    if len(a) > len(b):
        a, b = b, a
    out: dict = {}
    for Ma, ca in a.items():
        da = sum(Ma)
        for Mb, cb in b.items():
            if da + sum(Mb) > cap:
                continue
            M = tuple(x + y for x, y in zip(Ma, Mb))
            v = ca * cb
            cur = out.get(M)
            s = v if cur is None else cur + v
            if s.is_zero():
                out.pop(M, None)
            else:
                out[M] = s
    return out

def sdiff(a: dict, j: int) -> dict:
    """Partial derivative with respect to coordinate j."""
    out = {}
    for M, c in a.items():
        k = M[j]
        if k == 0:
            continue
        Md = M[:j] + (k - 1,) + M[j + 1:]
        v = c * k
        cur = out.get(Md)
        s = v if cur is None else cur + v
        if not s.is_zero():
            out[Md] = s
        elif Md in out:
            del out[Md]
    return out

def smin_deg(a: dict):
    return min((sum(M) for M in a), default=None)

def geometric_inverse(u: dict, field, n, cap: int) -> dict:
    """Inverse of a series with invertible constant term, truncated at cap.

    Computed as c^-1 * sum_k (-(u/c - 1))^k; terminates because the
    nonconstant part has positive entry sums.
    """
    c0 = u.get((0,) * n)
    if c0 is None or c0.is_zero():
        raise InconsistentSystemError("series with zero constant term is not invertible")
    c0_inv = c0.inverse()
    v = sscale(u, c0_inv)
    v.pop((0,) * n)
    if v and smin_deg(v) <= 0:
        raise InconsistentSystemError("nonconstant part must have positive order")
    out = sone(field, n)
    power = sone(field, n)
    nv = sneg(v)
    while True:
        power = smul(power, nv, cap)
        if not power:
            break
        siadd(out, power)
    return sscale(out, c0_inv)

def sequal(a: dict, b: dict) -> bool:
    return sclean(a) == sclean(b)
