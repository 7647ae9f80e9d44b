"""Exact field arithmetic and certified embeddings."""

import math

import pytest
from gmpy2 import mpq
from hypothesis import given, settings, strategies as st

from nfkit.coeff import (
    ComplexBox,
    Field,
    all_embeddings,
    compare_magnitudes,
    embed,
    scalar_arith,
    sign_of_real_scalar,
    to_mpq,
)
from nfkit.errors import (
    FieldMismatchError,
    InvalidInputError,
    ReducibleMinimalPolynomialError,
)

from conftest import random_scalar, rng_for


class TestScalarArithmetic:
    def test_gaussian_norm(self, Qi):
        a = Qi.scalar([1, 1])
        assert a * a.conj() == Qi.scalar(2)
        assert scalar_arith("mul", a, Qi.scalar([1, -1])) == Qi.scalar(2)

    def test_inverse_sqrt2(self, F_sqrt2):
        t = F_sqrt2.gen
        assert scalar_arith("inv", t) == F_sqrt2.scalar(["0", "1/2"])
        assert t * t.inverse() == F_sqrt2.one

    def test_sixth_root_cube(self, F_cyc6):
        t = F_cyc6.gen
        assert t ** 3 == -F_cyc6.one

    def test_division_by_zero(self, Q):
        with pytest.raises(ZeroDivisionError):
            Q.zero.inverse()

    def test_reducible_minpoly_detected_lazily(self):
        # t^2 - 1 factors; inverting t - 1 exposes the zero divisor
        F = Field.number_field([-1, 0, 1], (1.0, 0.0))
        with pytest.raises(ReducibleMinimalPolynomialError):
            (F.gen - 1).inverse()

    def test_mixed_fields_rejected(self, Q, Qi):
        with pytest.raises(FieldMismatchError):
            Q.one + Qi.one

    def test_rational_parsing(self, Q):
        assert Q.scalar("2/3") + Q.scalar("1/3") == Q.one
        assert to_mpq("-7/2") == mpq(-7, 2)

    def test_pow_negative(self, F_sqrt2):
        t = F_sqrt2.gen
        assert t ** -2 == F_sqrt2.scalar("1/2")


def _axiom_fields():
    return [Field.rationals(), Field.gaussian(),
            Field.number_field([-2, 0, 1], (1.4142, 0.0))]


@pytest.mark.parametrize("field", _axiom_fields(), ids=["Q", "Qi", "sqrt2"])
def test_field_axioms_randomized(field):
    rng = rng_for(f"axioms-{field.kind}-{field.m}")
    for _ in range(60):
        a = random_scalar(field, rng)
        b = random_scalar(field, rng)
        c = random_scalar(field, rng)
        assert (a + b) + c == a + (b + c)
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c
        assert a + (-a) == field.zero
        if not a.is_zero():
            assert a * a.inverse() == field.one


@given(num=st.integers(-40, 40), den=st.integers(1, 40), e=st.integers(0, 5))
@settings(max_examples=60, deadline=None)
def test_rational_power_consistency(num, den, e):
    Q = Field.rationals()
    a = Q.scalar(mpq(num, den))
    prod = Q.one
    for _ in range(e):
        prod = prod * a
    assert a ** e == prod


class TestEmbeddings:
    def test_embed_rational(self, Q):
        for prec in (53, 96, 160):
            box = embed(Q.scalar("2/3"), prec)
            assert box.contains_value(mpq(2, 3))
            assert float(box.rad) <= 2.0 ** -prec * 2

    def test_embed_sqrt2(self, F_sqrt2):
        box = embed(F_sqrt2.gen, 64)
        assert abs(float(box.re) - math.sqrt(2)) <= float(box.rad) + 1e-15
        assert float(box.im) == 0.0

    def test_embed_gaussian_unit(self, Qi):
        box = embed(Qi.gen, 53)
        assert float(box.re) == 0.0 and float(box.im) == 1.0

    def test_radius_shrinks_with_precision(self, F_cyc6):
        t = F_cyc6.gen
        r1 = float(embed(t + 1, 64).rad)
        r2 = float(embed(t + 1, 128).rad)
        r3 = float(embed(t + 1, 256).rad)
        assert r2 < r1 / 2 and r3 < r2 / 2

    def test_all_embeddings_sqrt2(self, F_sqrt2):
        boxes = all_embeddings(F_sqrt2.gen, 64)
        res = sorted(float(b.re) for b in boxes)
        assert res[0] == pytest.approx(-math.sqrt(2), abs=1e-12)
        assert res[1] == pytest.approx(math.sqrt(2), abs=1e-12)

    def test_all_embeddings_constant(self, F_cyc5):
        boxes = all_embeddings(F_cyc5.scalar(3), 64)
        assert len(boxes) == 4
        for b in boxes:
            assert b.contains_value(3)

    def test_all_embeddings_sixth_root(self, F_cyc6):
        boxes = all_embeddings(F_cyc6.gen, 64)
        ims = sorted(float(b.im) for b in boxes)
        assert ims[0] == pytest.approx(-math.sqrt(3) / 2, abs=1e-12)
        assert ims[1] == pytest.approx(math.sqrt(3) / 2, abs=1e-12)

    def test_norm_product_contains_integer(self, F_sqrt2):
        # (1 + t)(1 - t) has rational norm -1; magnitudes multiply to 1
        boxes = all_embeddings(F_sqrt2.one + F_sqrt2.gen, 96)
        lo = hi = mpq(1)
        for b in boxes:
            blo, bhi = b.abs_bounds_mpq()
            lo *= blo
            hi *= bhi
        assert lo <= 1 <= hi

    def test_embed_is_multiplicative_up_to_radius(self, F_cyc6):
        rng = rng_for("embed-hom")
        for _ in range(25):
            a = random_scalar(F_cyc6, rng)
            b = random_scalar(F_cyc6, rng)
            prod_box = embed(a, 96) * embed(b, 96)
            direct = embed(a * b, 96)
            assert direct.overlaps(prod_box)

    def test_conjugation_commutes_with_embedding(self, F_cyc6):
        rng = rng_for("embed-conj")
        for _ in range(25):
            a = random_scalar(F_cyc6, rng)
            assert embed(a.conj(), 96).overlaps(embed(a, 96).conjugate())

    def test_selector_must_identify_unique_root(self):
        with pytest.raises(InvalidInputError):
            Field.number_field([-2, 0, 1], (0.0, 0.0))  # midway between the roots


class TestComparisons:
    def test_compare_separated(self, F_sqrt2):
        t = F_sqrt2.gen
        assert compare_magnitudes(t, F_sqrt2.one) > 0
        assert compare_magnitudes(F_sqrt2.one, t) < 0

    def test_compare_tie(self, F_cyc6):
        t = F_cyc6.gen
        assert compare_magnitudes(t, F_cyc6.one) == 0  # both on the unit circle
        assert compare_magnitudes(t, -t) == 0

    def test_sign_of_real(self, F_sqrt2):
        t = F_sqrt2.gen
        assert sign_of_real_scalar(t - 1) > 0
        assert sign_of_real_scalar(t - 2) < 0
        assert sign_of_real_scalar(F_sqrt2.zero) == 0

    def test_box_abs_bounds(self):
        box = ComplexBox.from_mpq(mpq(3, 4), mpq(0), 96)
        lo, hi = box.abs_bounds_mpq()
        assert lo <= mpq(3, 4) <= hi
        assert hi - lo < mpq(1, 2 ** 40)


def test_conjugation_requires_valid_exponent():
    # t -> t^2 is not an automorphism of Q[t]/(t^2 - 2)
    with pytest.raises(InvalidInputError):
        Field.number_field([-2, 0, 1], (1.4142, 0.0), conj_pow=2)


def test_descriptor_roundtrip(F_cyc6, Q, Qi):
    for f in (F_cyc6, Q, Qi):
        d = f.describe()
        if d["kind"] == "Q":
            assert Field.rationals() == f
        elif d["kind"] == "Q(i)":
            assert Field.gaussian() == f
        else:
            g = Field.number_field(d["minpoly"], tuple(d["root"]), conj_pow=d.get("conj_pow"))
            assert g == f
