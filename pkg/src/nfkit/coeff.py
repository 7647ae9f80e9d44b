"""Exact arithmetic in the coefficient field and certified complex enclosures.

The coefficient field K is one of:

* the rationals ``Q``,
* the Gaussian rationals ``Q(i)``,
* a number field ``Q[t]/(p)`` for a monic rational polynomial p of degree
  m >= 2, together with an approximate complex value selecting one root of
  p as the designated embedding into C.

Elements are stored as rational-coefficient polynomials in t of degree < m
(tuples of ``gmpy2.mpq``), always reduced mod p.  Equality is exact.

Magnitudes are never computed as bare floats: ``embed`` returns a
:class:`ComplexBox` (midpoint plus radius) that provably contains the image
of the element under the designated embedding, and all comparisons that
consume magnitudes go through certified box bounds with adaptive precision.
"""

from __future__ import annotations

import math
import os
from fractions import Fraction

import mpmath
from gmpy2 import isqrt, mpq, mpz
from mpmath import mp

from .errors import (
    InvalidInputError,
    FieldMismatchError,
    PrecisionError,
    PrecisionFloorReached,
    ReducibleMinimalPolynomialError,
)

PREC_FLOOR_ENV = "NFKIT_PREC_FLOOR"

_Q0 = mpq(0)
_Q1 = mpq(1)


def max_precision() -> int:
    """Bit cap for adaptive refinement (env ``NFKIT_PREC_FLOOR``)."""
    return int(os.environ.get(PREC_FLOOR_ENV, "4096"))


def to_mpq(x) -> mpq:
    """Parse an exact rational from int, mpq, Fraction or a string 'a/b'."""
    if isinstance(x, (int, mpz)):
        return mpq(x)
    if isinstance(x, mpq):
        return x
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, str):
        s = x.strip()
        if "/" in s:
            num, den = s.split("/")
            return mpq(int(num), int(den))
        return mpq(int(s))
    raise InvalidInputError(f"not an exact rational: {x!r}")


def _mpq_of_mpf(x) -> mpq:
    # exact conversion; mpf values are dyadic rationals
    sign, man, exp, _ = x._mpf_
    if man == 0:
        if exp != 0:  # inf/nan encodings
            raise PrecisionError("non-finite value in enclosure")
        return mpq(0)
    q = mpq(man) * (mpq(2) ** exp)
    return -q if sign else q


def _exact_to_mpq(x) -> mpq:
    if isinstance(x, float):
        return mpq(*x.as_integer_ratio())
    return _mpq_of_mpf(x)


def _neg_exact(x):
    # mpf negation under the global context would round to its precision;
    # flip the sign bit instead
    if isinstance(x, float):
        return -x
    from mpmath.libmp import mpf_neg
    return mp.make_mpf(mpf_neg(x._mpf_))


# ---------------------------------------------------------------------------
# Complex enclosures


class ComplexBox:
    """Disk ``|z - (re + i*im)| <= rad`` known to contain a complex value.

    Midpoints are binary floats: machine floats for ``prec <= 53``,
    ``mpmath.mpf`` above.  Every arithmetic helper inflates the radius
    enough to absorb its own rounding, so containment is preserved.
    """

    __slots__ = ("re", "im", "rad", "prec")

    def __init__(self, re, im, rad, prec=53):
        self.re = re
        self.im = im
        self.rad = rad
        self.prec = prec

    # relative slop absorbing a short chain of midpoint roundings
    @property
    def _eps(self):
        return 2.0 ** (8 - self.prec)

    def _ctx(self):
        return mp.workprec(self.prec + 16)

    @property
    def re_mid(self):
        return self.re

    @property
    def im_mid(self):
        return self.im

    @property
    def radius(self):
        return self.rad

    @classmethod
    def from_mpq(cls, re_q, im_q=_Q0, prec=53):
        """Enclose an exact rational point at the given precision."""
        if prec <= 53:
            re, im = float(re_q), float(im_q)
            rad = (abs(re) + abs(im) + 1e-300) * 2.0 ** (6 - prec if prec < 53 else -50)
            return cls(re, im, rad, prec)
        with mp.workprec(prec + 16):
            re = mp.mpf(re_q.numerator) / mp.mpf(re_q.denominator)
            im = mp.mpf(im_q.numerator) / mp.mpf(im_q.denominator)
            rad = (abs(re) + abs(im)) * mp.mpf(2.0) ** (4 - prec)
        return cls(re, im, rad, prec)

    def _wrap(self, fn):
        if self.prec <= 53:
            return fn()
        with self._ctx():
            return fn()

    def __add__(self, other):
        def go():
            re = self.re + other.re
            im = self.im + other.im
            rad = self.rad + other.rad + (abs(re) + abs(im)) * self._eps
            return ComplexBox(re, im, rad, min(self.prec, other.prec))

        return self._wrap(go)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return ComplexBox(_neg_exact(self.re), _neg_exact(self.im), self.rad, self.prec)

    def conjugate(self):
        return ComplexBox(self.re, _neg_exact(self.im), self.rad, self.prec)

    def to_float(self):
        """Downconvert to a machine-float box (radius inflated to cover it)."""
        if self.prec <= 53:
            return self
        re, im = float(self.re), float(self.im)
        rad = float(self.rad) * (1 + 2e-16) + (abs(re) + abs(im)) * 2.0 ** -51 + 5e-324
        return ComplexBox(re, im, rad, 53)

    def __mul__(self, other):
        def go():
            a, b, c, d = self.re, self.im, other.re, other.im
            re = a * c - b * d
            im = a * d + b * c
            m1 = abs(a) + abs(b) + self.rad
            m2 = abs(c) + abs(d) + other.rad
            rad = m1 * other.rad + m2 * self.rad + (m1 * m2 + abs(re) + abs(im)) * self._eps
            return ComplexBox(re, im, rad, min(self.prec, other.prec))

        return self._wrap(go)

    def scale(self, q: mpq):
        """Multiply by an exact rational."""

        def go():
            if self.prec <= 53:
                f = float(Fraction(q.numerator, q.denominator))
            else:
                f = mp.mpf(q.numerator) / mp.mpf(q.denominator)
            re = self.re * f
            im = self.im * f
            rad = self.rad * abs(f) + (abs(re) + abs(im) + self.rad) * self._eps
            return ComplexBox(re, im, rad, self.prec)

        return self._wrap(go)

    def __truediv__(self, other):
        def go():
            den_abs = math.hypot(float(other.re), float(other.im)) if other.prec <= 53 else mp.hypot(other.re, other.im)
            margin = den_abs - other.rad
            if not margin > 0:
                raise PrecisionError("division by a box containing zero")
            c, d = other.re, other.im
            den = c * c + d * d
            re = (self.re * c + self.im * d) / den
            im = (self.im * c - self.re * d) / den
            mid_abs = abs(re) + abs(im)
            rad = (self.rad + mid_abs * other.rad) / margin + (mid_abs + self.rad) * self._eps
            return ComplexBox(re, im, rad, min(self.prec, other.prec))

        return self._wrap(go)

    def abs_hi(self):
        def go():
            h = math.hypot(float(self.re), float(self.im)) if self.prec <= 53 else mp.hypot(self.re, self.im)
            return h * (1.0 + self._eps) + self.rad

        return self._wrap(go)

    def abs_lo(self):
        def go():
            h = math.hypot(float(self.re), float(self.im)) if self.prec <= 53 else mp.hypot(self.re, self.im)
            lo = h * (1.0 - self._eps) - self.rad
            return lo if lo > 0 else (h * 0.0)

        return self._wrap(go)

    def abs_bounds_mpq(self):
        """Exact-rational (lower, upper) bounds for the enclosed magnitude."""
        re_q = _exact_to_mpq(self.re)
        im_q = _exact_to_mpq(self.im)
        rad_q = _exact_to_mpq(self.rad)
        s = re_q * re_q + im_q * im_q
        rr = s.numerator * s.denominator
        r = isqrt(rr)  # r <= sqrt(num*den) < r + 1
        lo = mpq(r, s.denominator) - rad_q
        hi = mpq(r if r * r == rr else r + 1, s.denominator) + rad_q
        return (lo if lo > 0 else _Q0, hi)

    def contains_zero(self) -> bool:
        return not (self.abs_lo() > 0)

    def overlaps(self, other) -> bool:
        def go():
            d = math.hypot(float(self.re - other.re), float(self.im - other.im)) \
                if min(self.prec, other.prec) <= 53 else mp.hypot(self.re - other.re, self.im - other.im)
            return d <= (self.rad + other.rad) * (1 + self._eps) + abs(d) * self._eps

        return self._wrap(go)

    def contains_value(self, re_q, im_q=_Q0) -> bool:
        """Certified test that the exact rational point lies in the disk."""
        dre = _exact_to_mpq(self.re) - to_mpq(re_q)
        dim = _exact_to_mpq(self.im) - to_mpq(im_q)
        return dre * dre + dim * dim <= _exact_to_mpq(self.rad) ** 2

    def __repr__(self):
        return f"ComplexBox({float(self.re):.17g}, {float(self.im):.17g}, rad={float(self.rad):.3g})"


def box_int_combination(boxes, ints, prec):
    """Certified enclosure of ``sum(k * box)`` for integer weights.

    Fast path used by resonance scans; integer scaling keeps the error
    budget tiny.
    """
    re = 0.0
    im = 0.0
    rad = 0.0
    mags = 0.0
    if prec <= 53:
        for k, b in zip(ints, boxes):
            if k == 0:
                continue
            re += k * b.re
            im += k * b.im
            ak = abs(k)
            rad += ak * b.rad
            mags += ak * (abs(b.re) + abs(b.im))
        rad += (mags + abs(re) + abs(im)) * 2.0 ** (8 - prec if prec < 53 else -45)
        return ComplexBox(re, im, rad, prec)
    with mp.workprec(prec + 16):
        re = mp.mpf(0)
        im = mp.mpf(0)
        rad = mp.mpf(0)
        mags = mp.mpf(0)
        for k, b in zip(ints, boxes):
            if k == 0:
                continue
            re += k * b.re
            im += k * b.im
            ak = abs(k)
            rad += ak * b.rad
            mags += ak * (abs(b.re) + abs(b.im))
        rad += (mags + abs(re) + abs(im)) * mp.mpf(2.0) ** (8 - prec)
    return ComplexBox(re, im, rad, prec)


# ---------------------------------------------------------------------------
# Dense rational polynomial helpers (for gcd / inversion / reduction)


def _pstrip(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _pdivmod(a, b):
    a = list(a)
    q = [_Q0] * max(0, len(a) - len(b) + 1)
    inv_lead = 1 / b[-1]
    for i in range(len(a) - len(b), -1, -1):
        c = a[i + len(b) - 1] * inv_lead
        if c == 0:
            continue
        q[i] = c
        for j, bj in enumerate(b):
            a[i + j] -= c * bj
    return _pstrip(q), _pstrip(a)


def _pxgcd(a, b):
    """Extended Euclid over Q[t]: returns (g, u, v) with u*a + v*b = g."""
    r0, r1 = list(a), list(b)
    u0, u1 = [_Q1], []
    v0, v1 = [], [_Q1]
    while r1:
        q, r = _pdivmod(r0, r1)
        r0, r1 = r1, r
        u0, u1 = u1, _psub(u0, _pmul(q, u1))
        v0, v1 = v1, _psub(v0, _pmul(q, v1))
    return r0, u0, v0


def _pmul(a, b):
    if not a or not b:
        return []
    out = [_Q0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return _pstrip(out)


def _psub(a, b):
    out = list(a) + [_Q0] * max(0, len(b) - len(a))
    for j, bj in enumerate(b):
        out[j] -= bj
    return _pstrip(out)


# ---------------------------------------------------------------------------
# Field and scalars


class Field:
    """A global coefficient field K with a designated complex embedding.

    All scalars of one computation share a single ``Field``; arithmetic
    between scalars of different fields raises :class:`FieldMismatchError`.
    Irreducibility of the minimal polynomial is not verified up front:
    a zero divisor surfaces as :class:`ReducibleMinimalPolynomialError`
    during inversion.
    """

    RATIONALS = "rationals"
    GAUSSIAN = "gaussian_rationals"
    NUMBER_FIELD = "number_field"

    def __init__(self, kind, minpoly=None, selector=None, conj_pow=None):
        self.kind = kind
        if kind == self.RATIONALS:
            self.m = 1
            self.minpoly = None
            self.selector = (0.0, 0.0)
            self.conj_pow = None
        elif kind == self.GAUSSIAN:
            self.m = 2
            self.minpoly = (_Q1, _Q0, _Q1)  # t^2 + 1
            self.selector = (0.0, 1.0)
            self.conj_pow = 3
        elif kind == self.NUMBER_FIELD:
            mp_coeffs = tuple(to_mpq(c) for c in minpoly)
            if len(mp_coeffs) < 3 or mp_coeffs[-1] != 1:
                raise InvalidInputError("minimal polynomial must be monic of degree >= 2")
            self.minpoly = mp_coeffs
            self.m = len(mp_coeffs) - 1
            if selector is None:
                raise InvalidInputError("number field requires an embedding selector")
            self.selector = (float(selector[0]), float(selector[1]))
            self.conj_pow = conj_pow
        else:
            raise InvalidInputError(f"unknown field kind {kind!r}")

        self._root_cache = {}
        self._basis_cache = {}
        self._reduction = self._reduction_rows()
        self.zero = Scalar(self, (_Q0,) * self.m)
        self.one = Scalar(self, (_Q1,) + (_Q0,) * (self.m - 1))
        self._conj_cols = None
        if self.conj_pow is not None:
            self._conj_cols = self._conjugation_columns(self.conj_pow)
        if self.kind == self.NUMBER_FIELD:
            # fail early on a selector that does not identify a unique root
            self._designated_index(64)

    # -- constructors

    @classmethod
    def rationals(cls):
        return cls(cls.RATIONALS)

    @classmethod
    def gaussian(cls):
        return cls(cls.GAUSSIAN)

    @classmethod
    def number_field(cls, minpoly, root, conj_pow=None):
        if isinstance(root, complex):
            root = (root.real, root.imag)
        return cls(cls.NUMBER_FIELD, minpoly=minpoly, selector=root, conj_pow=conj_pow)

    def describe(self) -> dict:
        if self.kind == self.RATIONALS:
            return {"kind": "Q"}
        if self.kind == self.GAUSSIAN:
            return {"kind": "Q(i)"}
        d = {"kind": "number_field",
             "minpoly": [str(c) for c in self.minpoly],
             "root": [self.selector[0], self.selector[1]]}
        if self.conj_pow is not None:
            d["conj_pow"] = self.conj_pow
        return d

    def __eq__(self, other):
        return (isinstance(other, Field) and self.kind == other.kind
                and self.minpoly == other.minpoly and self.selector == other.selector)

    def __hash__(self):
        return hash((self.kind, self.minpoly, self.selector))

    def __repr__(self):
        if self.kind == self.RATIONALS:
            return "Field(Q)"
        if self.kind == self.GAUSSIAN:
            return "Field(Q(i))"
        return f"Field(Q[t]/({self._poly_str()}), t ~ {self.selector[0]:.6g}{self.selector[1]:+.6g}i)"

    def _poly_str(self):
        parts = []
        for k, c in enumerate(self.minpoly):
            if c == 0:
                continue
            parts.append(f"{c}*t^{k}" if k else f"{c}")
        return " + ".join(parts)

    @property
    def real_embedding(self) -> bool:
        return self.kind == self.RATIONALS or (
            self.kind == self.NUMBER_FIELD and self.selector[1] == 0.0)

    # -- scalar construction

    def scalar(self, x) -> "Scalar":
        """Coerce int / rational string / mpq / Fraction / coefficient list."""
        if isinstance(x, Scalar):
            if x.field != self:
                raise FieldMismatchError("scalar from a different field")
            return x
        if isinstance(x, (list, tuple)):
            if len(x) > self.m:
                raise InvalidInputError(f"coefficient list longer than field degree {self.m}")
            coeffs = tuple(to_mpq(c) for c in x) + (_Q0,) * (self.m - len(x))
            return Scalar(self, coeffs)
        q = to_mpq(x)
        return Scalar(self, (q,) + (_Q0,) * (self.m - 1))

    @property
    def gen(self) -> "Scalar":
        """The image of t (raises for the rationals)."""
        if self.m == 1:
            raise InvalidInputError("the rationals have no generator t")
        return Scalar(self, (_Q0, _Q1) + (_Q0,) * (self.m - 2))

    # -- tuple-level arithmetic

    def _reduction_rows(self):
        # row j = coefficients of t^(m+j) mod p, for j = 0..m-2
        if self.m == 1:
            return []
        rows = []
        prev = tuple(-c for c in self.minpoly[:-1])  # t^m
        rows.append(prev)
        for _ in range(self.m - 2):
            shifted = (_Q0,) + prev[:-1]
            overflow = prev[-1]
            if overflow:
                shifted = tuple(s + overflow * r for s, r in zip(shifted, rows[0]))
            rows.append(shifted)
            prev = shifted
        return rows

    def _add(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def _sub(self, a, b):
        return tuple(x - y for x, y in zip(a, b))

    def _neg(self, a):
        return tuple(-x for x in a)

    def _mul(self, a, b):
        m = self.m
        if m == 1:
            return (a[0] * b[0],)
        conv = [_Q0] * (2 * m - 1)
        for i, ai in enumerate(a):
            if ai == 0:
                continue
            for j, bj in enumerate(b):
                if bj != 0:
                    conv[i + j] += ai * bj
        out = conv[:m]
        for j in range(m, 2 * m - 1):
            c = conv[j]
            if c == 0:
                continue
            row = self._reduction[j - m]
            for k in range(m):
                if row[k] != 0:
                    out[k] += c * row[k]
        return tuple(out)

    def _inv(self, a):
        if all(c == 0 for c in a):
            raise ZeroDivisionError("inverse of zero scalar")
        if self.m == 1:
            return (1 / a[0],)
        g, u, _ = _pxgcd(list(a), list(self.minpoly))
        if len(g) != 1:
            raise ReducibleMinimalPolynomialError(
                f"gcd with the minimal polynomial has degree {len(g) - 1}; "
                "the declared minimal polynomial is reducible")
        scale = 1 / g[0]
        out = [c * scale for c in u]
        out += [_Q0] * (self.m - len(out))
        return tuple(out[: self.m])

    # -- conjugation automorphism

    def _t_power_columns(self, top):
        one = (_Q1,) + (_Q0,) * (self.m - 1)
        cols = [one]
        t = (_Q0, _Q1) + (_Q0,) * (self.m - 2) if self.m > 1 else (_Q1,)
        cur = one
        for _ in range(top):
            cur = self._mul(cur, t)
            cols.append(cur)
        return cols

    def _conjugation_columns(self, e):
        if self.m == 1:
            return [(_Q1,)]
        powers = self._t_power_columns(e * (self.m - 1))
        cols = [powers[e * j] for j in range(self.m)]
        # hom check: p(t^e) = 0 mod p
        acc = (_Q0,) * self.m
        te = powers[e]
        cur = (_Q1,) + (_Q0,) * (self.m - 1)
        for k, c in enumerate(self.minpoly):
            if k:
                cur = self._mul(cur, te)
            if c != 0:
                acc = self._add(acc, tuple(c * x for x in cur))
        if any(x != 0 for x in acc):
            raise InvalidInputError("conjugation exponent does not define an automorphism")
        # involution check on the basis
        for j in range(self.m):
            img = self._apply_cols(cols, cols[j])
            want = tuple(_Q1 if k == j else _Q0 for k in range(self.m))
            if img != want:
                raise InvalidInputError("conjugation automorphism is not an involution")
        return cols

    def _apply_cols(self, cols, a):
        out = [_Q0] * self.m
        for j, aj in enumerate(a):
            if aj == 0:
                continue
            col = cols[j]
            for k in range(self.m):
                if col[k] != 0:
                    out[k] += aj * col[k]
        return tuple(out)

    @property
    def has_conjugation(self) -> bool:
        return self.kind == self.RATIONALS or self._conj_cols is not None

    def _conj(self, a):
        if self.kind == self.RATIONALS:
            return a
        if self._conj_cols is None:
            raise InvalidInputError("no conjugation automorphism declared for this field")
        return self._apply_cols(self._conj_cols, a)

    # -- embeddings

    def _roots_at(self, prec):
        """Certified enclosures of all roots of p, sorted by (re, im).

        Radii come from the unconditional bound: for monic p of degree m,
        some root lies within ``|p(z)|**(1/m)`` of any point z.  Pairwise
        disjointness then pins each enclosure to a single root.
        """
        boxes = self._root_cache.get(prec)
        if boxes is not None:
            return boxes
        if self.kind == self.GAUSSIAN:
            boxes = [ComplexBox(*_cast_pair(0.0, -1.0, prec), rad=_zero_at(prec), prec=prec),
                     ComplexBox(*_cast_pair(0.0, 1.0, prec), rad=_zero_at(prec), prec=prec)]
            self._root_cache[prec] = boxes
            return boxes

        m = self.m
        W = max(96, m * (prec + 24) + 48)
        attempts = 0
        while True:
            attempts += 1
            with mp.workprec(W):
                coeffs = [_mpfq(c) for c in reversed(self.minpoly)]
                try:
                    roots = mp.polyroots(coeffs, maxsteps=200, extraprec=W)
                except mp.NoConvergence:
                    roots = None
                if roots is not None:
                    dcoeffs = [to_mpq(k) * self.minpoly[k] for k in range(1, m + 1)]
                    polished = []
                    for z in roots:
                        # rational coefficients: snap near-real roots to the axis
                        if abs(mp.im(z)) < mp.mpf(2) ** (-W // 2):
                            z = mp.mpc(mp.re(z), 0)
                        for _ in range(4):
                            pv = _peval(self.minpoly, z)
                            dv = _peval_list(dcoeffs, z)
                            if dv == 0:
                                break
                            z = z - pv / dv
                        polished.append(z)
                    enclosures = []
                    ok = True
                    for z in polished:
                        absp = abs(_peval(self.minpoly, z))
                        # generous cover for coefficient-conversion and Horner rounding
                        err = mp.mpf(2) ** (10 + m - W) * _coeff_scale(self.minpoly, z)
                        rad = mp.root(absp + err, m) * (1 + mp.mpf(2) ** (8 - W))
                        if rad > mp.mpf(2) ** (-prec):
                            ok = False
                            break
                        enclosures.append((z, rad))
                    if ok:
                        # pairwise disjoint -> each disk isolates one root
                        for i in range(len(enclosures)):
                            for j in range(i + 1, len(enclosures)):
                                zi, ri = enclosures[i]
                                zj, rj = enclosures[j]
                                if abs(zi - zj) <= ri + rj:
                                    ok = False
                    if ok:
                        boxes = []
                        for z, rad in sorted(enclosures, key=lambda t: (t[0].real, t[0].imag)):
                            boxes.append(_downconvert(z, rad, prec))
                        self._root_cache[prec] = boxes
                        return boxes
            if attempts >= 6:
                raise PrecisionError(f"root isolation failed for {self!r} at {prec} bits")
            W *= 2

    def _designated_index(self, prec=64):
        boxes = self._roots_at(prec)
        sel = complex(*self.selector)
        dists = [math.hypot(float(b.re) - sel.real, float(b.im) - sel.imag) for b in boxes]
        order = sorted(range(len(boxes)), key=lambda i: dists[i])
        best = order[0]
        if len(boxes) > 1:
            gap = min(math.hypot(float(boxes[i].re) - float(boxes[j].re),
                                 float(boxes[i].im) - float(boxes[j].im))
                      for i in range(len(boxes)) for j in range(i + 1, len(boxes)))
            if dists[best] >= gap / 2:
                raise InvalidInputError(
                    "embedding selector does not identify a unique root "
                    f"(distance {dists[best]:.3g}, half gap {gap / 2:.3g})")
        return best

    def _basis_boxes(self, prec):
        """Enclosures of 1, t, ..., t^(m-1) under the designated embedding."""
        basis = self._basis_cache.get(prec)
        if basis is not None:
            return basis
        if self.kind == self.RATIONALS:
            basis = [ComplexBox.from_mpq(_Q1, _Q0, prec)]
        else:
            root = self._roots_at(prec)[self._designated_index(prec)]
            basis = [ComplexBox.from_mpq(_Q1, _Q0, prec)]
            for _ in range(self.m - 1):
                basis.append(basis[-1] * root)
        self._basis_cache[prec] = basis
        return basis

    def embed_tuple(self, coeffs, prec) -> ComplexBox:
        # guard bits keep the returned radius below 2^-prec for moderate values
        w = prec + 16
        basis = self._basis_boxes(w)
        box = None
        for c, b in zip(coeffs, basis):
            if c == 0:
                continue
            term = b.scale(c)
            box = term if box is None else box + term
        return box if box is not None else ComplexBox.from_mpq(_Q0, _Q0, w)

    def all_root_boxes(self, prec):
        if self.kind == self.RATIONALS:
            return [ComplexBox.from_mpq(_Q0, _Q0, prec)]
        return list(self._roots_at(prec))


def _zero_at(prec):
    return 0.0 if prec <= 53 else mp.mpf(0)


def _cast_pair(re, im, prec):
    if prec <= 53:
        return re, im
    return mp.mpf(re), mp.mpf(im)


def _mpfq(q):
    return mp.mpf(q.numerator) / mp.mpf(q.denominator)


def _peval(coeffs_low_to_high, z):
    acc = mp.mpf(0)
    for c in reversed(coeffs_low_to_high):
        acc = acc * z + _mpfq(c)
    return acc


def _peval_list(coeffs_low_to_high, z):
    acc = mp.mpf(0)
    for c in reversed(coeffs_low_to_high):
        acc = acc * z + _mpfq(c)
    return acc


def _coeff_scale(coeffs, z):
    s = mp.mpf(0)
    az = max(mp.mpf(1), abs(z))
    pw = mp.mpf(1)
    for c in coeffs:
        s += abs(_mpfq(c)) * pw
        pw *= az
    return s


def _downconvert(z, rad, prec):
    if prec <= 53:
        re, im = float(z.real), float(z.imag)
        r = float(rad) + (abs(re) + abs(im)) * 2.0 ** -50 + 5e-324
        return ComplexBox(re, im, r, prec)
    with mp.workprec(prec + 16):
        re = mp.mpf(z.real)
        im = mp.mpf(z.imag)
        r = mp.mpf(rad) + (abs(re) + abs(im)) * mp.mpf(2) ** (4 - prec)
    return ComplexBox(re, im, r, prec)


class Scalar:
    """An element of K in canonical form (reduced mod p, lowest terms)."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field, coeffs):
        self.field = field
        self.coeffs = coeffs

    # -- structure

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    @property
    def is_rational(self) -> bool:
        return all(c == 0 for c in self.coeffs[1:])

    @property
    def rational(self) -> mpq:
        if not self.is_rational:
            raise InvalidInputError("scalar is not rational")
        return self.coeffs[0]

    def __eq__(self, other):
        if isinstance(other, Scalar):
            return self.field == other.field and self.coeffs == other.coeffs
        if isinstance(other, (int, mpq, Fraction, str)):
            return self == self.field.scalar(other)
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __bool__(self):
        return not self.is_zero()

    # -- arithmetic

    def _coerce(self, other):
        if isinstance(other, Scalar):
            if other.field != self.field:
                raise FieldMismatchError("mixed-field arithmetic is rejected")
            return other
        if isinstance(other, (int, mpq, Fraction, str)):
            return self.field.scalar(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Scalar(self.field, self.field._add(self.coeffs, o.coeffs))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Scalar(self.field, self.field._sub(self.coeffs, o.coeffs))

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Scalar(self.field, self.field._sub(o.coeffs, self.coeffs))

    def __neg__(self):
        return Scalar(self.field, self.field._neg(self.coeffs))

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Scalar(self.field, self.field._mul(self.coeffs, o.coeffs))

    __rmul__ = __mul__

    def inverse(self):
        return Scalar(self.field, self.field._inv(self.coeffs))

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        out = self.field.one
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def conj(self):
        """Image under the declared conjugation automorphism."""
        return Scalar(self.field, self.field._conj(self.coeffs))

    # -- numerics

    def embed(self, prec=53) -> ComplexBox:
        """Certified enclosure under the designated embedding of K."""
        return self.field.embed_tuple(self.coeffs, prec)

    def all_embeddings(self, prec=53):
        """One enclosure per root of p (the images under all embeddings)."""
        out = []
        prec = prec + 16
        for root in self.field.all_root_boxes(prec):
            box = None
            for k, c in enumerate(self.coeffs):
                if c == 0:
                    continue
                pw = ComplexBox.from_mpq(_Q1, _Q0, prec)
                for _ in range(k):
                    pw = pw * root
                term = pw.scale(c)
                box = term if box is None else box + term
            out.append(box if box is not None else ComplexBox.from_mpq(_Q0, _Q0, prec))
        return out

    def abs_sq_exact(self):
        """|a|^2 as an exact rational when the field structure permits, else None."""
        f = self.field
        if f.kind == Field.RATIONALS:
            return self.coeffs[0] ** 2
        if f.kind == Field.GAUSSIAN:
            return self.coeffs[0] ** 2 + self.coeffs[1] ** 2
        if f._conj_cols is not None:
            u = self * self.conj()
            if u.is_rational:
                return u.rational
        return None

    def abs_bounds(self, prec=96):
        """Exact-rational (lower, upper) bounds of the embedded magnitude."""
        sq = self.abs_sq_exact()
        if sq is not None:
            r = isqrt(sq.numerator * sq.denominator)
            return (mpq(r, sq.denominator), mpq(r + 1, sq.denominator)) \
                if r * r != sq.numerator * sq.denominator \
                else (mpq(r, sq.denominator), mpq(r, sq.denominator))
        return self.embed(prec).abs_bounds_mpq()

    def __repr__(self):
        if self.field.m == 1 or self.is_rational:
            return str(self.coeffs[0])
        parts = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if k == 0:
                parts.append(str(c))
            elif k == 1:
                parts.append(f"{c}*t")
            else:
                parts.append(f"{c}*t^{k}")
        return " + ".join(parts) if parts else "0"

    def literal(self):
        """Canonical serialization: a rational string or a coefficient list."""
        if self.field.m == 1 or self.is_rational:
            return str(self.coeffs[0])
        return [str(c) for c in self.coeffs]


# ---------------------------------------------------------------------------
# Operation surface and comparisons


def scalar_arith(op: str, a: Scalar, b: Scalar | None = None) -> Scalar:
    """Dispatch table for the basic exact operations."""
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "neg":
        return -a
    if op == "inv":
        return a.inverse()
    raise InvalidInputError(f"unknown scalar operation {op!r}")


def embed(a: Scalar, precision: int = 53) -> ComplexBox:
    return a.embed(precision)


def all_embeddings(a: Scalar, precision: int = 53):
    return a.all_embeddings(precision)


def sign_of_real_scalar(a: Scalar, max_prec=None) -> int:
    """Certified sign of a scalar whose designated embedding is known real.

    Terminates for every nonzero input; zero is detected exactly.
    """
    if a.is_zero():
        return 0
    cap = max_prec or max_precision()
    prec = 64
    while True:
        box = a.embed(prec)
        lo = box.re - box.rad
        hi = box.re + box.rad
        if lo > 0:
            return 1
        if hi < 0:
            return -1
        if prec >= cap:
            raise PrecisionFloorReached(
                f"sign of {a!r} unresolved at {prec} bits")
        prec *= 2


def compare_magnitudes(a: Scalar, b: Scalar, max_prec=None) -> int:
    """Compare |a| with |b| under the designated embedding.

    Returns -1, 0 or +1; 0 means the magnitudes could not be separated
    (exactly equal, or still overlapping at the precision floor).  Callers
    must break 0 with a deterministic rule and never assert equality.
    """
    qa = a.abs_sq_exact()
    qb = b.abs_sq_exact()
    if qa is not None and qb is not None:
        return -1 if qa < qb else (1 if qa > qb else 0)
    if a == b or a == -b:
        return 0
    f = a.field
    if f._conj_cols is not None:
        d = a * a.conj() - b * b.conj()
        if d.is_zero():
            return 0
        return sign_of_real_scalar(d, max_prec)
    if f.real_embedding:
        d = a * a - b * b
        if d.is_zero():
            return 0
        return sign_of_real_scalar(d, max_prec)
    cap = max_prec or max_precision()
    prec = 64
    while True:
        ba, bb = a.embed(prec), b.embed(prec)
        if ba.abs_hi() < bb.abs_lo():
            return -1
        if bb.abs_hi() < ba.abs_lo():
            return 1
        if prec >= cap:
            return 0
        prec *= 2
