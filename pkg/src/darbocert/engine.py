"""Certified nested iteration A_{k+1} = Conv(T A_k) on tail boxes.

For the affine diagonal operator class the image of a box is a box, and
boxes are closed and convex, so the convex-hull step rewrites exactly to
the image itself and the measure chain mu(A_0) >= mu(A_1) >= ... is
computable in closed form.  Every step asserts the nesting of the chain,
the per-n contraction inequality lhs_n(mu(TA)) <= rhs_n(mu(A)) on a ladder
of n values, and the same inequality for the limit functions.

Outcomes:

* CERTIFIED   mu fell below tol with every per-step check satisfied; the
              certified set chain witnesses a fixed point, and for
              contractive operators an explicit one is attached.
* REFUTED     a re-checkable violating tuple (step, n, lhs, rhs) exists.
* INCONCLUSIVE the iteration budget ran out; decay statistics and a limit
              estimate of the mu sequence are reported so that a stall far
              from zero is distinguishable from slow decay.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .expr import BinOp, Expr, Num, Var, eval_expr, limit_in_n
from .mnc import (
    DEFAULT_HORIZON,
    MncError,
    SetUnion,
    TailBox,
    UndecidedComparisonError,
    conv_hull_mnc,
    hausdorff_mnc,
    subset,
)
from .operators import (
    FixedPointWitness,
    NotContractiveError,
    OperatorSpec,
    apply_to_box,
    as_operator,
    fixed_point_witness,
    verify_self_map,
)
from .shifting import (
    FAIL,
    PASS,
    TIE_TOL,
    CheckReport,
    FunctionSequencePair,
    SampleGrid,
    check_equality_only_at_zero,
    run_all_checks,
)

__all__ = [
    "CERTIFIED",
    "REFUTED",
    "INCONCLUSIVE",
    "DEFAULT_ENGINE_LADDER",
    "PreconditionError",
    "IterationState",
    "Certificate",
    "darbo_iterate",
    "check_example_bound",
    "classic_darbo_run",
    "weak_contraction_run",
]

CERTIFIED = "CERTIFIED"
REFUTED = "REFUTED"
INCONCLUSIVE = "INCONCLUSIVE"

DEFAULT_ENGINE_LADDER = (1, 10, 100, 1_000, 10_000, 100_000, 1_000_000)


class PreconditionError(ValueError):
    """A run precondition failed (not a refutation of the contraction)."""


@dataclass
class IterationState:
    """One step of the chain: the measure, the inequality margins
    (rhs - lhs, one per ladder n plus the limit pair) and the running
    estimate of the measure sequence's limit."""

    step: int
    mu: float
    margins: dict[str, float]
    subset_ok: bool
    p_estimate: float | None
    box: TailBox = field(repr=False, compare=False, default=None)  # type: ignore[assignment]

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "mu": self.mu,
            "margins": self.margins,
            "subsetOk": self.subset_ok,
            "pEstimate": self.p_estimate,
        }


@dataclass
class Certificate:
    outcome: str
    trace: list[IterationState]
    witness: FixedPointWitness | None = None
    refutation: dict | None = None
    p_estimate: float | None = None
    decay: dict | None = None
    details: dict = field(default_factory=dict)

    @property
    def mu_trace(self) -> list[float]:
        return [s.mu for s in self.trace]

    def to_dict(self) -> dict:
        witness = None
        if self.witness is not None:
            witness = {
                "head": list(self.witness.point.head),
                "tail": {
                    "terms": [
                        {"alpha": c, "rho": r} for c, r in self.witness.point.tail.terms
                    ],
                    "beta": self.witness.point.tail.constant,
                },
                "residual": self.witness.residual,
            }
        return {
            "outcome": self.outcome,
            "trace": [s.to_dict() for s in self.trace],
            "witness": witness,
            "refutation": self.refutation,
            "pEstimate": self.p_estimate,
            "decay": self.decay,
            "details": self.details,
        }


def _aitken_estimate(mus: list[float]) -> float:
    """Limit estimate of the measure sequence (Aitken delta-squared when
    usable, else the last value); exact geometric decay gives 0."""
    if len(mus) < 3:
        return mus[-1]
    a, b, c = mus[-3], mus[-2], mus[-1]
    denom = c - 2.0 * b + a
    if denom == 0.0:
        return c
    p = c - (c - b) ** 2 / denom
    if not np.isfinite(p):
        return c
    return max(0.0, p)


def _decay_stats(mus: list[float]) -> dict:
    ratios = [
        mus[k + 1] / mus[k] for k in range(len(mus) - 1) if mus[k] > 0.0
    ]
    recent = ratios[-10:]
    return {
        "steps": len(mus) - 1,
        "lastRatio": ratios[-1] if ratios else None,
        "meanRecentRatio": (sum(recent) / len(recent)) if recent else None,
    }


def _limit_eval(limit_expr: Expr | None, seq_expr: Expr, x: float) -> float:
    if limit_expr is not None:
        return float(eval_expr(limit_expr, float(x), 1.0))
    return limit_in_n(seq_expr, float(x), 1e-9)


def _enforce_pair_checks(
    reports: dict[str, CheckReport], require: bool, context: str
) -> None:
    bad = [name for name, rep in reports.items() if rep.verdict != PASS]
    if not bad:
        return
    message = f"{context}: pair checks not all PASS: {', '.join(sorted(bad))}"
    if require:
        raise PreconditionError(message)
    warnings.warn(message + " (continuing: checks overridden)", stacklevel=3)


def _attach_witness(op) -> FixedPointWitness | None:
    try:
        return fixed_point_witness(op)
    except (NotContractiveError, UndecidedComparisonError):
        return None


def _run_chain(
    op,
    domain: TailBox,
    lhs_seq: Expr,
    rhs_seq: Expr,
    lhs_limit: Expr | None,
    rhs_limit: Expr | None,
    tol: float,
    max_iter: int,
    n_ladder: tuple[int, ...],
    horizon: int,
    details: dict,
) -> Certificate:
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be positive")

    current = domain
    mus = [hausdorff_mnc(current).value]
    trace = [IterationState(0, mus[0], {}, True, None, box=current)]
    if mus[0] < tol:
        # relatively compact entry case: certified without iterating
        return Certificate(
            CERTIFIED, trace, witness=_attach_witness(op),
            p_estimate=mus[0], decay=_decay_stats(mus), details=details,
        )

    for k in range(max_iter):
        image = apply_to_box(op, current, horizon)
        mu_image = hausdorff_mnc(image).value
        # Conv(TA) = TA for boxes; the hull descriptor's measure must agree
        if conv_hull_mnc(SetUnion((image,))).value != mu_image:
            raise MncError("convex hull rewrite lost exactness")  # unreachable

        nested = subset(image, current, horizon)
        margins: dict[str, float] = {}
        refutation: dict | None = None
        if not nested:
            refutation = {"step": k, "n": "nesting", "lhs": mu_image, "rhs": mus[-1]}

        lhs_lim = _limit_eval(lhs_limit, lhs_seq, mu_image)
        rhs_lim = _limit_eval(rhs_limit, rhs_seq, mus[-1])
        margins["limit"] = rhs_lim - lhs_lim
        if refutation is None and lhs_lim > rhs_lim + TIE_TOL:
            refutation = {"step": k, "n": "limit", "lhs": lhs_lim, "rhs": rhs_lim}

        for n in n_ladder:
            lhs_n = float(eval_expr(lhs_seq, mu_image, float(n)))
            rhs_n = float(eval_expr(rhs_seq, mus[-1], float(n)))
            margins[f"n={n}"] = rhs_n - lhs_n
            if refutation is None and lhs_n > rhs_n + TIE_TOL:
                refutation = {"step": k, "n": n, "lhs": lhs_n, "rhs": rhs_n}

        if refutation is None and mu_image > mus[-1] + TIE_TOL:
            refutation = {"step": k, "n": "monotone", "lhs": mu_image, "rhs": mus[-1]}

        mus.append(mu_image)
        trace.append(
            IterationState(k + 1, mu_image, margins, nested, _aitken_estimate(mus), box=image)
        )
        if refutation is not None:
            return Certificate(
                REFUTED, trace, refutation=refutation,
                p_estimate=_aitken_estimate(mus), decay=_decay_stats(mus), details=details,
            )
        current = image
        if mu_image < tol:
            return Certificate(
                CERTIFIED, trace, witness=_attach_witness(op),
                p_estimate=_aitken_estimate(mus), decay=_decay_stats(mus), details=details,
            )
    return Certificate(
        INCONCLUSIVE, trace,
        p_estimate=_aitken_estimate(mus), decay=_decay_stats(mus), details=details,
    )


def darbo_iterate(
    operator: OperatorSpec,
    domain: TailBox,
    pair: FunctionSequencePair,
    tol: float = 1e-9,
    max_iter: int = 10_000,
    n_ladder: tuple[int, ...] = DEFAULT_ENGINE_LADDER,
    *,
    grid: SampleGrid | None = None,
    horizon: int = DEFAULT_HORIZON,
    require_pair_checks: bool = True,
    pair_reports: dict[str, CheckReport] | None = None,
) -> Certificate:
    """Run the certified iteration with the contraction hypothesis
    psi_n(mu(TA)) <= phi_n(mu(A)).

    Preconditions: the operator maps the domain into itself, and the pair
    passes the full shifting-check battery (overridable with
    ``require_pair_checks=False``, which downgrades failures to a warning).
    """
    op = as_operator(operator)
    grid = grid or SampleGrid()
    if pair_reports is None:
        pair_reports = run_all_checks(pair, grid)
    _enforce_pair_checks(pair_reports, require_pair_checks, "darbo_iterate")
    if not verify_self_map(op, domain, horizon):
        raise PreconditionError("operator does not map the domain into itself")
    return _run_chain(
        op, domain, pair.psi_seq, pair.phi_seq, pair.psi_limit, pair.phi_limit,
        tol, max_iter, tuple(n_ladder), horizon, {"mode": "main"},
    )


def check_example_bound(
    pair: FunctionSequencePair,
    grid: SampleGrid,
    n_list: tuple[int, ...],
) -> CheckReport:
    """For every listed n and every grid pair (u, v) satisfying
    psi_n(u) <= phi_n(v), verify 2u - v <= (2n+1)/(n(n+1)) within the tie
    tolerance; additionally verify the bound decreases along n and that
    pairs satisfying the limit hypothesis obey 2u - v <= 0 (u <= v/2)."""
    t = grid.t_values()
    lhs_matrix = (2.0 * t)[:, None] - t[None, :]
    per_n: dict[str, dict] = {}
    counterexample = None
    bounds = []
    for n in n_list:
        bound = float(Fraction(2 * n + 1, n * (n + 1)))
        bounds.append(bound)
        psi_u = np.asarray(eval_expr(pair.psi_seq, t, float(n)), dtype=float)
        phi_v = np.asarray(eval_expr(pair.phi_seq, t, float(n)), dtype=float)
        mask = psi_u[:, None] <= phi_v[None, :]
        if mask.any():
            masked = np.where(mask, lhs_matrix, -np.inf)
            flat = int(masked.argmax())
            i, j = np.unravel_index(flat, masked.shape)
            max_lhs = float(masked[i, j])
        else:
            max_lhs = float("-inf")
            i = j = 0
        per_n[str(n)] = {"bound": bound, "maxLhs": max_lhs, "margin": bound - max_lhs}
        if counterexample is None and max_lhs > bound + TIE_TOL:
            counterexample = {
                "n": int(n),
                "u": float(t[i]),
                "v": float(t[j]),
                "lhs": max_lhs,
                "bound": bound,
            }
    details: dict = {"perN": per_n}
    details["boundDecreasing"] = all(
        b2 <= b1 + TIE_TOL for b1, b2 in zip(bounds, bounds[1:])
    )
    if not details["boundDecreasing"] and counterexample is None:
        counterexample = {"reason": "bound not decreasing along n"}

    if pair.psi_limit is not None and pair.phi_limit is not None:
        psi_lim = np.asarray(eval_expr(pair.psi_limit, t, 1.0), dtype=float)
        phi_lim = np.asarray(eval_expr(pair.phi_limit, t, 1.0), dtype=float)
        psi_lim = np.broadcast_to(psi_lim, t.shape)
        phi_lim = np.broadcast_to(phi_lim, t.shape)
        mask = psi_lim[:, None] <= phi_lim[None, :]
        masked = np.where(mask, lhs_matrix, -np.inf)
        limit_max = float(masked.max()) if mask.any() else float("-inf")
        details["limitMaxLhs"] = limit_max
        if counterexample is None and limit_max > TIE_TOL:
            flat = int(masked.argmax())
            i, j = np.unravel_index(flat, masked.shape)
            counterexample = {
                "n": "limit",
                "u": float(t[i]),
                "v": float(t[j]),
                "lhs": limit_max,
                "bound": 0.0,
            }
    verdict = FAIL if counterexample is not None else PASS
    return CheckReport("contraction_bound", verdict, counterexample=counterexample, details=details)


def _identity_pair(k: float | None = None) -> FunctionSequencePair:
    """psi_n = t (constant in n); phi_n = k*t when k is given, else t."""
    psi = Var("t")
    phi: Expr = Var("t") if k is None else BinOp("*", Num(Fraction(k)), Var("t"))
    return FunctionSequencePair(psi_seq=psi, phi_seq=phi, psi_limit=psi, phi_limit=phi)


def classic_darbo_run(
    operator: OperatorSpec,
    domain: TailBox,
    k: float,
    tol: float = 1e-9,
    max_iter: int = 10_000,
    n_ladder: tuple[int, ...] = DEFAULT_ENGINE_LADDER,
    *,
    grid: SampleGrid | None = None,
    horizon: int = DEFAULT_HORIZON,
) -> Certificate:
    """Recover the constant-factor contraction condition mu(TA) <= k*mu(A)
    by running the iteration with psi_n = identity, phi_n = k * identity.

    A certified trace additionally satisfies mu_{j+1} <= k * mu_j at every
    step (re-verified on the trace)."""
    if not 0.0 <= k < 1.0:
        raise PreconditionError(f"contraction constant {k} outside [0, 1)")
    pair = _identity_pair(k)
    cert = darbo_iterate(
        operator, domain, pair, tol, max_iter, n_ladder,
        grid=grid, horizon=horizon,
    )
    cert.details = {"mode": "classic", "k": k}
    if cert.outcome == CERTIFIED:
        mus = cert.mu_trace
        for j in range(len(mus) - 1):
            if mus[j + 1] > k * mus[j] + TIE_TOL:
                cert.outcome = REFUTED  # unreachable: ladder check subsumes it
                cert.refutation = {"step": j, "n": "ratio", "lhs": mus[j + 1], "rhs": k * mus[j]}
                break
    return cert


def weak_contraction_run(
    operator: OperatorSpec,
    domain: TailBox,
    pair: FunctionSequencePair,
    tol: float = 1e-9,
    max_iter: int = 10_000,
    n_ladder: tuple[int, ...] = DEFAULT_ENGINE_LADDER,
    *,
    grid: SampleGrid | None = None,
    horizon: int = DEFAULT_HORIZON,
    require_pair_checks: bool = True,
) -> Certificate:
    """Run the iteration under the weak-contraction inequality
    psi_n(mu(TA)) <= psi_n(mu(A)) - phi_n(mu(A)).

    Preconditions: the limit functions agree only at zero, and phi_n is
    nonnegative on the grid at every ladder n (phi maps into the
    nonnegative reals)."""
    op = as_operator(operator)
    grid = grid or SampleGrid()
    eq_report = check_equality_only_at_zero(pair, grid)
    if eq_report.verdict != PASS:
        message = f"weak_contraction_run: equality_only_at_zero is {eq_report.verdict}"
        if require_pair_checks:
            raise PreconditionError(message)
        warnings.warn(message + " (continuing: checks overridden)", stacklevel=2)
    t = grid.t_values()
    for n in grid.n_ladder:
        phi_vals = np.asarray(eval_expr(pair.phi_seq, t, float(n)), dtype=float)
        if float(phi_vals.min()) < -TIE_TOL:
            raise PreconditionError(
                f"phi_{n} takes negative values on the grid (min {float(phi_vals.min())})"
            )
    if not verify_self_map(op, domain, horizon):
        raise PreconditionError("operator does not map the domain into itself")

    rhs_seq = BinOp("-", pair.psi_seq, pair.phi_seq)
    rhs_limit = None
    if pair.psi_limit is not None and pair.phi_limit is not None:
        rhs_limit = BinOp("-", pair.psi_limit, pair.phi_limit)
    return _run_chain(
        op, domain, pair.psi_seq, rhs_seq, pair.psi_limit, rhs_limit,
        tol, max_iter, tuple(n_ladder), horizon, {"mode": "weak"},
    )
