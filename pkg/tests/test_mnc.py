import random

import pytest
from hypothesis import given, strategies as st

from darbocert.mnc import (
    InvalidBoxError,
    InvalidPointError,
    InvalidTailFormError,
    MncError,
    MncValue,
    Point,
    SetUnion,
    TailBox,
    TailForm,
    UndecidedComparisonError,
    closure,
    contains_point,
    conv_hull_mnc,
    convex_combination,
    eventual_sign,
    hausdorff_mnc,
    is_nonnegative,
    mnc_union,
    scale_translate,
    subset,
    truncation_tail_sup,
)


def symmetric_box(level, terms=()):
    """lo = -(level + terms), hi = +(level + terms)."""
    hi = TailForm(terms, level)
    return TailBox((), (), hi.scale(-1.0), hi)


UNIT = symmetric_box(1.0)
HALF = symmetric_box(0.5)


class TestTailForm:
    def test_value_and_asym(self):
        f = TailForm(((5.0, 0.9),), 0.3)
        assert f.asym == 0.3
        assert f.value(2) == pytest.approx(0.3 + 5 * 0.81)

    def test_normalisation_merges_and_drops(self):
        f = TailForm(((1.0, 0.5), (2.0, 0.5), (-3.0, 0.5), (4.0, 0.0)), 1.0)
        assert f.terms == ()  # coefficients cancel; ratio-zero term vanishes at i >= 1
        assert f.constant == 1.0

    def test_ratio_out_of_range_rejected(self):
        with pytest.raises(InvalidTailFormError):
            TailForm(((1.0, 1.0),), 0.0)
        with pytest.raises(InvalidTailFormError):
            TailForm(((1.0, -0.1),), 0.0)

    def test_geometric_decay_bound(self):
        f = TailForm(((3.0, 0.8), (-2.0, 0.5)), 0.7)
        for i in (1, 5, 20, 100):
            assert abs(f.value(i) - f.asym) <= f.coeff_abs_sum() * f.max_ratio() ** i + 1e-15

    @given(
        st.lists(
            st.tuples(
                st.floats(-10, 10, allow_nan=False),
                st.floats(0, 0.95, allow_nan=False),
            ),
            max_size=3,
        ),
        st.lists(
            st.tuples(
                st.floats(-10, 10, allow_nan=False),
                st.floats(0, 0.95, allow_nan=False),
            ),
            max_size=3,
        ),
        st.floats(-5, 5, allow_nan=False),
        st.floats(-5, 5, allow_nan=False),
    )
    def test_algebra_closure(self, t1, t2, b1, b2):
        f = TailForm(tuple(t1), b1)
        g = TailForm(tuple(t2), b2)
        s, p = f + g, f * g
        assert s.asym == b1 + b2
        assert p.asym == b1 * b2
        assert all(0 <= r < 1 for _, r in p.terms)
        for i in (1, 3, 10):
            assert s.value(i) == pytest.approx(f.value(i) + g.value(i), abs=1e-9)
            assert p.value(i) == pytest.approx(f.value(i) * g.value(i), abs=1e-8)


class TestSignMachinery:
    def test_dominant_positive_constant(self):
        # 0.5 - 0.5**i >= 0 for i >= 1 (equality at i = 1)
        assert is_nonnegative(TailForm(((-1.0, 0.5),), 0.5))

    def test_dominant_negative_constant(self):
        assert not is_nonnegative(TailForm(((1.0, 0.5),), -0.25))

    def test_early_pointwise_violation(self):
        # -2*0.5**i + 0.5 < 0 at i = 1
        assert not is_nonnegative(TailForm(((-2.0, 0.5),), 0.5))

    def test_beta_zero_single_signed(self):
        assert is_nonnegative(TailForm(((1.0, 0.9), (2.0, 0.3)), 0.0))
        assert not is_nonnegative(TailForm(((-1.0, 0.9),), 0.0))

    def test_beta_zero_mixed_undecided(self):
        with pytest.raises(UndecidedComparisonError):
            is_nonnegative(TailForm(((1.0, 0.9), (-1.0, 0.8)), 0.0))

    def test_beta_zero_mixed_early_negative(self):
        # 0.8**i - 2*0.9**i < 0 at i = 1
        assert not is_nonnegative(TailForm(((1.0, 0.8), (-2.0, 0.9)), 0.0))

    def test_eventual_sign(self):
        assert eventual_sign(TailForm((), 0.0)) == (0, 1)
        form = TailForm(((-8.0, 0.5),), 1.0)
        sign, idx = eventual_sign(form)
        assert sign == 1
        assert all(form.value(i) > 0 for i in range(idx, idx + 5))


class TestBoxValidation:
    def test_positive_lower_asym_rejected(self):
        with pytest.raises(InvalidBoxError):
            TailBox((), (), TailForm((), 0.1), TailForm((), 1.0))

    def test_head_interval_order_enforced(self):
        with pytest.raises(InvalidBoxError):
            TailBox((1.0,), (0.0,), TailForm((), -1.0), TailForm((), 1.0))

    def test_crossing_tails_rejected(self):
        # lo(1) = 3*0.5 - 1 = 0.5 exceeds the constant upper envelope 0.2
        with pytest.raises(InvalidBoxError):
            TailBox((), (), TailForm(((3.0, 0.5),), -1.0), TailForm((), 0.2))

    def test_head_length_mismatch(self):
        with pytest.raises(InvalidBoxError):
            TailBox((0.0,), (), TailForm((), -1.0), TailForm((), 1.0))


class TestHausdorffMnc:
    def test_unit_box(self):
        mu = hausdorff_mnc(UNIT)
        assert mu.value == 1.0
        assert not mu.relatively_compact

    def test_geometric_tails_are_compact(self):
        box = TailBox((), (), TailForm((), 0.0), TailForm(((2.0, 0.5),), 0.0))
        mu = hausdorff_mnc(box)
        assert mu.value == 0.0
        assert mu.relatively_compact

    def test_head_never_contributes(self):
        box = TailBox((-7.0,), (7.0,), TailForm((), -0.3), TailForm((), 0.3))
        assert hausdorff_mnc(box).value == 0.3
        # independent truncation oracle agrees
        assert abs(truncation_tail_sup(box, 10**6) - 0.3) <= 1e-6

    def test_negative_value_rejected(self):
        with pytest.raises(MncError):
            MncValue(-0.5)


class TestTruncationOracle:
    def test_constant_tails_any_cut(self):
        for cut in (1, 10, 1000, 10**6):
            assert truncation_tail_sup(UNIT, cut) == 1.0

    def test_mixed_tail_at_cut_200(self):
        hi = TailForm(((5.0, 0.9),), 0.3)
        box = TailBox((), (), hi.scale(-1.0), hi)
        # 5 * 0.9**201 ~ 3.1e-9, so the sup sits within 1e-8 of 0.3
        assert abs(truncation_tail_sup(box, 200) - 0.3) <= 1e-8

    def test_geometric_only_tail_at_cut_100(self):
        box = TailBox((), (), TailForm((), 0.0), TailForm(((10.0, 0.9),), 0.0))
        assert truncation_tail_sup(box, 100) < 1e-3  # bound: 10 * 0.9**101

    def test_cut_below_head_rejected(self):
        box = TailBox((-1.0,), (1.0,), TailForm((), -0.5), TailForm((), 0.5))
        with pytest.raises(MncError):
            truncation_tail_sup(box, 0)

    def test_oracle_converges_to_closed_form(self):
        rng = random.Random(7)
        for _ in range(25):
            terms = tuple(
                (rng.uniform(-10, 10), rng.uniform(0, 0.99)) for _ in range(rng.randint(0, 3))
            )
            beta = rng.uniform(0.05, 3.0)
            hi = TailForm(tuple((abs(c), r) for c, r in terms), beta)
            box = TailBox((), (), hi.scale(-1.0), hi)
            assert abs(truncation_tail_sup(box, 10**6) - hausdorff_mnc(box).value) <= 1e-6


class TestUnion:
    def test_max_rule(self):
        box_03 = symmetric_box(0.3)
        assert mnc_union(SetUnion((UNIT, box_03))).value == 1.0
        # oracle on the union's pointwise envelope: max of per-box sups
        oracle = max(truncation_tail_sup(UNIT, 10**6), truncation_tail_sup(box_03, 10**6))
        assert oracle == pytest.approx(1.0, abs=1e-6)

    def test_single_box(self):
        assert mnc_union(SetUnion((HALF,))).value == hausdorff_mnc(HALF).value

    def test_two_compact_boxes(self):
        a = TailBox((), (), TailForm((), 0.0), TailForm(((1.0, 0.5),), 0.0))
        b = TailBox((), (), TailForm(((-2.0, 0.9),), 0.0), TailForm((), 0.0))
        assert mnc_union(SetUnion((a, b))).value == 0.0

    def test_empty_union_rejected(self):
        with pytest.raises(InvalidBoxError):
            SetUnion(())

    def test_hull_descriptor_agrees(self):
        union = SetUnion((UNIT, symmetric_box(0.3), HALF))
        assert conv_hull_mnc(union).value == mnc_union(union).value


class TestConvexCombination:
    def test_symmetric_equality_case(self):
        box_06 = symmetric_box(0.6)
        combined = convex_combination(0.5, UNIT, box_06)
        assert hausdorff_mnc(combined).value == 0.8
        assert abs(truncation_tail_sup(combined, 10**6) - 0.8) <= 1e-6

    def test_endpoints_return_operands(self):
        assert convex_combination(1.0, UNIT, HALF) is UNIT
        assert convex_combination(0.0, UNIT, HALF) is HALF

    def test_lambda_out_of_range(self):
        with pytest.raises(MncError):
            convex_combination(1.5, UNIT, HALF)

    def test_head_padding(self):
        headed = TailBox((-2.0,), (2.0,), TailForm((), -0.5), TailForm((), 0.5))
        combined = convex_combination(0.5, headed, UNIT)
        assert combined.head_len == 1
        assert combined.lo(1) == 0.5 * -2.0 + 0.5 * -1.0

    def test_convexity_inequality_randomised(self):
        rng = random.Random(3)
        for _ in range(200):
            level_a, level_b = rng.uniform(0.1, 3), rng.uniform(0.1, 3)
            a = symmetric_box(level_a, ((rng.uniform(0, 5), rng.uniform(0, 0.9)),))
            b = symmetric_box(level_b)
            lam = rng.uniform(0, 1)
            mu = hausdorff_mnc(convex_combination(lam, a, b)).value
            assert mu <= lam * level_a + (1 - lam) * level_b + 1e-12


class TestSubset:
    def test_half_unit_inside_unit(self):
        assert subset(HALF, UNIT)

    def test_unit_not_inside_half(self):
        assert not subset(UNIT, HALF)

    def test_geometric_plus_constant_inside_constant(self):
        # 0.5 + 0.5**i <= 1 for every i >= 1, equality at i = 1
        inner_hi = TailForm(((1.0, 0.5),), 0.5)
        inner = TailBox((), (), inner_hi.scale(-1.0), inner_hi)
        assert subset(inner, UNIT)
        assert not subset(UNIT, inner)

    def test_head_padding_against_tail(self):
        headed = TailBox((-0.25,), (0.25,), TailForm((), -0.5), TailForm((), 0.5))
        assert subset(headed, UNIT)
        assert not subset(UNIT, headed)

    def test_undecided_comparison_surfaces(self):
        # hi tails differ by a mixed-sign beta=0 form: honest refusal
        a_hi = TailForm(((1.0, 0.8),), 1.0)
        b_hi = TailForm(((1.0, 0.9),), 1.0)
        a = TailBox((), (), TailForm((), -1.0), a_hi)
        b = TailBox((), (), TailForm((), -1.0), b_hi)
        with pytest.raises(UndecidedComparisonError):
            subset(a, b)

    def test_monotonicity_of_measure(self):
        rng = random.Random(11)
        for _ in range(200):
            level = rng.uniform(0.2, 3)
            outer = symmetric_box(level, ((rng.uniform(0, 5), rng.uniform(0, 0.9)),))
            lam = rng.uniform(0.05, 1.0)
            inner = TailBox(
                (),
                (),
                outer.tail_lo.scale(lam),
                outer.tail_hi.scale(lam),
            )
            assert subset(inner, outer)
            assert hausdorff_mnc(inner).value <= hausdorff_mnc(outer).value


class TestClosure:
    def test_identity_and_measure_preserved(self):
        assert closure(UNIT) is UNIT
        assert hausdorff_mnc(closure(UNIT)).value == hausdorff_mnc(UNIT).value


class TestScaleTranslate:
    def test_doubling(self):
        assert hausdorff_mnc(scale_translate(UNIT, 2.0)).value == 2.0

    def test_collapse_to_point(self):
        assert hausdorff_mnc(scale_translate(UNIT, 0.0)).value == 0.0

    def test_reflection_preserves_measure(self):
        assert hausdorff_mnc(scale_translate(UNIT, -1.0)).value == 1.0

    def test_homogeneity_exact(self):
        rng = random.Random(5)
        for _ in range(100):
            box = symmetric_box(rng.uniform(0.1, 2), ((rng.uniform(0, 5), rng.uniform(0, 0.9)),))
            c = rng.uniform(-3, 3)
            assert hausdorff_mnc(scale_translate(box, c)).value == abs(c) * hausdorff_mnc(box).value

    def test_shift_with_nonzero_asym_rejected(self):
        with pytest.raises(InvalidPointError):
            Point((), TailForm((), 0.5))

    def test_shift_moves_box(self):
        shift = Point((), TailForm(((1.0, 0.5),), 0.0))
        moved = scale_translate(UNIT, 1.0, shift)
        assert moved.lo(1) == -1.0 + 0.5
        assert moved.hi(1) == 1.0 + 0.5
        assert hausdorff_mnc(moved).value == 1.0


class TestPoints:
    def test_membership(self):
        p = Point((), TailForm(((0.5, 0.5),), 0.0))
        assert contains_point(UNIT, p)
        assert not contains_point(HALF, Point((0.9,), TailForm((), 0.0)))

    def test_zero_point_in_every_symmetric_box(self):
        for level in (0.1, 1.0, 3.0):
            assert contains_point(symmetric_box(level), Point())
