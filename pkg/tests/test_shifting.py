from fractions import Fraction

import pytest

from darbocert.expr import eval_expr, parse_expr
from darbocert.scenarios import broken_pair, demo_pair
from darbocert.shifting import (
    FAIL,
    PASS,
    TIE_TOL,
    UNDECIDED,
    FunctionSequencePair,
    SampleGrid,
    check_condition_i,
    check_condition_ii,
    check_equality_only_at_zero,
    check_monotone_in_n,
    check_uniform_convergence,
    run_all_checks,
)

GRID = SampleGrid()  # t_max=100, step=0.1, ladder 1..2**20


def pair_from(psi, phi, psi_lim=None, phi_lim=None):
    return FunctionSequencePair(
        psi_seq=parse_expr(psi),
        phi_seq=parse_expr(phi),
        psi_limit=parse_expr(psi_lim) if psi_lim else None,
        phi_limit=parse_expr(phi_lim) if phi_lim else None,
    )


class TestUniformConvergence:
    def test_rational_pair_sup_errors_are_exact(self):
        rep = check_uniform_convergence(demo_pair(), GRID, 1e-6)
        assert rep.verdict == PASS
        # hand-derived identities: psi_n = 2+2t - 1/(n+1), phi_n = 2+t + 1/n,
        # so the uniform errors are 1/(n+1) and 1/n independent of t
        for n in GRID.n_ladder:
            assert abs(rep.sup_errors["psi"][str(n)] - float(Fraction(1, n + 1))) <= 1e-12
            assert abs(rep.sup_errors["phi"][str(n)] - float(Fraction(1, n))) <= 1e-12

    def test_divergent_family_with_declared_limit_fails(self):
        rep = check_uniform_convergence(pair_from("n*t", "2+t", "t", "2+t"), GRID, 1e-6)
        assert rep.verdict == FAIL
        ce = rep.counterexample
        assert ce["which"] == "psi" and ce["sup"] > ce["supPrev"]

    def test_divergent_family_without_limit_is_undecided(self):
        rep = check_uniform_convergence(pair_from("n*t", "2+t"), GRID, 1e-6)
        assert rep.verdict == UNDECIDED

    def test_estimated_limits_used_when_not_declared(self):
        undeclared = FunctionSequencePair(
            psi_seq=demo_pair().psi_seq, phi_seq=demo_pair().phi_seq
        )
        small = SampleGrid(t_max=5.0, step=0.5, n_ladder=tuple(2**j for j in range(12)))
        rep = check_uniform_convergence(undeclared, small, 1e-3)
        assert rep.verdict == PASS


class TestMonotone:
    def test_rational_pair(self):
        assert check_monotone_in_n(demo_pair(), GRID).verdict == PASS

    def test_constant_in_n_passes(self):
        assert check_monotone_in_n(pair_from("t", "2*t", "t", "2*t"), GRID).verdict == PASS

    def test_decreasing_psi_fails_with_recheckable_witness(self):
        pair = pair_from("t/n", "2+t", "t", "2+t")
        rep = check_monotone_in_n(pair, GRID)
        assert rep.verdict == FAIL
        ce = rep.counterexample
        lhs = eval_expr(pair.psi_seq, ce["t"], float(ce["n"]))
        rhs = eval_expr(pair.psi_seq, ce["t"], float(ce["nNext"]))
        assert lhs > rhs + TIE_TOL


class TestConditionI:
    def test_rational_pair_passes_both_readings(self):
        rep = check_condition_i(demo_pair(), GRID)
        assert rep.verdict == PASS
        assert rep.details == {"limitReading": PASS, "perNReading": PASS}

    def test_half_slope_identity_pair_passes(self):
        # psi = t, phi = t/2: psi(u) <= phi(v) forces u <= v/2 <= v
        assert check_condition_i(pair_from("t", "t/2", "t", "t/2"), GRID).verdict == PASS

    def test_shifted_pair_fails_with_witness(self):
        rep = check_condition_i(broken_pair(), GRID)
        assert rep.verdict == FAIL
        assert rep.details["limitReading"] == FAIL
        assert rep.details["perNReading"] == FAIL
        ce = rep.counterexample
        assert ce["u"] > ce["v"] + TIE_TOL and ce["psiU"] <= ce["phiV"]
        # the documented concrete violation is one of the flagged pairs
        pair = broken_pair()
        psi_15 = eval_expr(pair.psi_limit, 1.5, 1.0)
        phi_1 = eval_expr(pair.phi_limit, 1.0, 1.0)
        assert psi_15 <= phi_1 and 1.5 > 1.0


class TestConditionII:
    def test_rational_pair_passes(self):
        rep = check_condition_ii(demo_pair(), GRID)
        assert rep.verdict == PASS
        assert rep.details == {"limitReading": PASS, "perNReading": PASS}

    def test_half_slope_pair_passes(self):
        # w <= w/2 forces w = 0
        assert check_condition_ii(pair_from("t", "t/2", "t", "t/2"), GRID).verdict == PASS

    def test_shifted_pair_fails_with_witness(self):
        rep = check_condition_ii(broken_pair(), GRID)
        assert rep.verdict == FAIL
        ce = rep.counterexample
        assert ce["w"] > 0 and ce["psiW"] <= ce["phiW"]
        # the documented concrete violation w = 1: 1 <= 2
        pair = broken_pair()
        assert eval_expr(pair.psi_limit, 1.0, 1.0) <= eval_expr(pair.phi_limit, 1.0, 1.0)


class TestEqualityOnlyAtZero:
    def test_distinct_slopes_pass(self):
        assert check_equality_only_at_zero(pair_from("2*t", "t", "2*t", "t"), GRID).verdict == PASS

    def test_identical_functions_fail(self):
        rep = check_equality_only_at_zero(pair_from("t", "t", "t", "t"), GRID)
        assert rep.verdict == FAIL
        assert rep.counterexample["w"] > 0

    def test_rational_pair_limits_pass(self):
        # limits 2+2t vs 2+t differ by t, zero only at t = 0
        assert check_equality_only_at_zero(demo_pair(), GRID).verdict == PASS


class TestGridRefinement:
    @pytest.mark.parametrize("step", [0.4, 0.2, 0.1, 0.05])
    def test_fail_never_turns_pass_under_refinement(self, step):
        grid = SampleGrid(t_max=20.0, step=step, n_ladder=(1, 4, 16))
        assert check_condition_i(broken_pair(), grid).verdict == FAIL
        assert check_condition_ii(broken_pair(), grid).verdict == FAIL


class TestIdentityPairCoincidence:
    """With psi_n = t the per-n readings of conditions (i)/(ii) coincide
    with the simpler hypotheses 'u <= phi_n(v) for all n' / 'w <= phi_n(w)
    for all n'; verified against a hand-rolled oracle on a small grid."""

    def test_condition_i_matches_direct_oracle(self):
        import numpy as np

        grid = SampleGrid(t_max=10.0, step=0.25, n_ladder=(1, 2, 8, 64))
        phi = parse_expr("(n*(2+t)+1)/n")
        pair = FunctionSequencePair(
            psi_seq=parse_expr("t"),
            phi_seq=phi,
            psi_limit=parse_expr("t"),
            phi_limit=parse_expr("2+t"),
        )
        rep = check_condition_i(pair, grid)

        t = grid.t_values()
        hyp = np.ones((t.size, t.size), dtype=bool)
        for n in grid.n_ladder:
            phi_vals = np.asarray(eval_expr(phi, t, float(n)), dtype=float)
            hyp &= t[:, None] <= phi_vals[None, :]
        oracle_viol = bool((hyp & (t[:, None] > t[None, :] + TIE_TOL)).any())
        assert (rep.details["perNReading"] == FAIL) == oracle_viol

    def test_condition_ii_matches_direct_oracle(self):
        import numpy as np

        grid = SampleGrid(t_max=10.0, step=0.25, n_ladder=(1, 2, 8, 64))
        phi = parse_expr("t/2")
        pair = FunctionSequencePair(
            psi_seq=parse_expr("t"),
            phi_seq=phi,
            psi_limit=parse_expr("t"),
            phi_limit=parse_expr("t/2"),
        )
        rep = check_condition_ii(pair, grid)

        t = grid.t_values()
        hyp = np.ones(t.shape, dtype=bool)
        for n in grid.n_ladder:
            phi_vals = np.asarray(eval_expr(phi, t, float(n)), dtype=float)
            phi_vals = np.broadcast_to(phi_vals, t.shape)
            hyp &= t <= phi_vals
        oracle_viol = bool((hyp & (t > TIE_TOL)).any())
        assert (rep.details["perNReading"] == FAIL) == oracle_viol


class TestBattery:
    def test_rational_pair_all_pass(self):
        reports = run_all_checks(demo_pair(), GRID)
        assert [rep.verdict for rep in reports.values()] == [PASS] * 5

    def test_report_serialisation(self):
        reports = run_all_checks(broken_pair(), GRID)
        for rep in reports.values():
            d = rep.to_dict()
            assert set(d) == {"name", "verdict", "counterexample", "supErrors", "details"}
