"""Operators on the set model whose action on tail boxes is exact.

The catalog is restricted to coordinatewise affine maps x_i -> d_i x_i +
e_i with tail-form coefficient descriptions (plus finite compositions,
which are materialised back into a single map).  These commute with convex
hulls and map boxes to boxes, so every quantity in a certification run is
computable in closed form.  Coefficient tails whose sign cannot be decided
past the horizon are rejected rather than approximated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .mnc import (
    DEFAULT_HORIZON,
    InvalidBoxError,
    MncError,
    Point,
    TailBox,
    TailForm,
    UndecidedComparisonError,
    eventual_sign,
    subset,
)

__all__ = [
    "OperatorError",
    "NotContractiveError",
    "DiagonalAffineOperator",
    "OperatorSpec",
    "FixedPointWitness",
    "compose",
    "as_operator",
    "apply_to_box",
    "verify_self_map",
    "fixed_point_witness",
]


class OperatorError(MncError):
    pass


class NotContractiveError(OperatorError):
    """sup_i |d_i| >= 1: no coordinatewise fixed point formula."""


@dataclass(frozen=True)
class DiagonalAffineOperator:
    """x_i -> d_i * x_i + e_i with tail-form coefficient sequences.

    The offsets must form a genuine member of the space: asym(e) = 0.
    """

    d_head: tuple[float, ...] = ()
    d_tail: TailForm = TailForm()
    e_head: tuple[float, ...] = ()
    e_tail: TailForm = TailForm()

    def __post_init__(self):
        object.__setattr__(self, "d_head", tuple(float(x) for x in self.d_head))
        object.__setattr__(self, "e_head", tuple(float(x) for x in self.e_head))
        if self.e_tail.asym != 0.0:
            raise OperatorError(
                f"offset sequence has asymptotic value {self.e_tail.asym} != 0"
            )
        for x in self.d_head + self.e_head:
            if not math.isfinite(x):
                raise OperatorError("non-finite coefficient")

    def d(self, i: int) -> float:
        if i <= len(self.d_head):
            return self.d_head[i - 1]
        return self.d_tail.value(i)

    def e(self, i: int) -> float:
        if i <= len(self.e_head):
            return self.e_head[i - 1]
        return self.e_tail.value(i)

    @property
    def head_len(self) -> int:
        return max(len(self.d_head), len(self.e_head))


OperatorSpec = Union[DiagonalAffineOperator, Sequence[DiagonalAffineOperator]]


def compose(outer: DiagonalAffineOperator, inner: DiagonalAffineOperator) -> DiagonalAffineOperator:
    """Materialise outer(inner(x)): d = d_o*d_i, e = d_o*e_i + e_o."""
    h = max(outer.head_len, inner.head_len)
    d_head = tuple(outer.d(i) * inner.d(i) for i in range(1, h + 1))
    e_head = tuple(outer.d(i) * inner.e(i) + outer.e(i) for i in range(1, h + 1))
    return DiagonalAffineOperator(
        d_head,
        outer.d_tail * inner.d_tail,
        e_head,
        outer.d_tail * inner.e_tail + outer.e_tail,
    )


def as_operator(spec: OperatorSpec) -> DiagonalAffineOperator:
    """Materialise a spec: either a single map or a sequence applied in
    list order (the first element acts first)."""
    if isinstance(spec, DiagonalAffineOperator):
        return spec
    ops = list(spec)
    if not ops:
        raise OperatorError("empty operator composition")
    current = ops[0]
    for op in ops[1:]:
        current = compose(op, current)
    return current


def apply_to_box(spec: OperatorSpec, box: TailBox, horizon: int = DEFAULT_HORIZON) -> TailBox:
    """Exact image box of ``box`` under the operator.

    Coordinates where the sign of d is resolved pointwise are materialised
    into the head; beyond, the sign of the d tail is constant (dominance)
    and the image tails are tail-form products.  Raises
    UndecidedComparisonError when the sign of d past the horizon is
    genuinely undecidable.
    """
    op = as_operator(spec)
    h = max(box.head_len, op.head_len)
    sign, from_idx = eventual_sign(op.d_tail, start=h + 1, horizon=horizon)
    h = max(h, from_idx - 1)
    head_lo = []
    head_hi = []
    for i in range(1, h + 1):
        d, e = op.d(i), op.e(i)
        x, y = d * box.lo(i), d * box.hi(i)
        head_lo.append(min(x, y) + e)
        head_hi.append(max(x, y) + e)
    if sign >= 0:
        tail_lo = op.d_tail * box.tail_lo + op.e_tail
        tail_hi = op.d_tail * box.tail_hi + op.e_tail
    else:
        tail_lo = op.d_tail * box.tail_hi + op.e_tail
        tail_hi = op.d_tail * box.tail_lo + op.e_tail
    return TailBox(tuple(head_lo), tuple(head_hi), tail_lo, tail_hi)


def verify_self_map(spec: OperatorSpec, domain: TailBox, horizon: int = DEFAULT_HORIZON) -> bool:
    """True iff the image of ``domain`` is contained in ``domain``."""
    return subset(apply_to_box(spec, domain, horizon), domain, horizon)


@dataclass(frozen=True)
class FixedPointWitness:
    """Coordinatewise fixed point x_i = e_i / (1 - d_i) together with the
    observed residual sup_i |T(x)_i - x_i| over the probed coordinates."""

    point: Point
    residual: float


def _check_contractive(op: DiagonalAffineOperator, horizon: int) -> None:
    for i, d in enumerate(op.d_head, start=1):
        if abs(d) >= 1.0:
            raise NotContractiveError(f"|d_{i}| = {abs(d)} >= 1")
    beta = abs(op.d_tail.asym)
    if beta >= 1.0:
        raise NotContractiveError(f"|asym(d)| = {beta} >= 1")
    # beyond idx the geometric part is < 1 - |beta|, so |d(i)| < 1 there
    total = op.d_tail.coeff_abs_sum()
    start = len(op.d_head) + 1
    if total == 0.0:
        return
    rho = op.d_tail.max_ratio()
    idx = start
    while total * rho**idx >= 1.0 - beta:
        idx += 1
        if idx - start > horizon:
            raise NotContractiveError(
                f"cannot certify sup|d_i| < 1 within horizon {horizon}"
            )
    for i in range(start, idx + 1):
        if abs(op.d_tail.value(i)) >= 1.0:
            raise NotContractiveError(f"|d_{i}| = {abs(op.d_tail.value(i))} >= 1")


def _residual(op: DiagonalAffineOperator, point: Point, probe_to: int) -> float:
    idx = np.arange(1, probe_to + 1, dtype=np.int64)
    x = np.array([point.value(int(i)) for i in idx])
    d = np.array([op.d(int(i)) for i in idx])
    e = np.array([op.e(int(i)) for i in idx])
    best = float(np.abs(d * x + e - x).max())
    probe = probe_to
    for _ in range(40):
        probe *= 2
        if probe > 2**62:
            break
        xi = point.value(probe)
        best = max(best, abs(op.d(probe) * xi + op.e(probe) - xi))
    return best


def fixed_point_witness(
    spec: OperatorSpec, horizon: int = DEFAULT_HORIZON
) -> FixedPointWitness:
    """Solve x = Tx coordinatewise for a contractive operator.

    With a constant d tail the solution tail is exact in closed form;
    otherwise coordinates up to the horizon are solved numerically and the
    tail beyond uses the asymptotic coefficient.  The returned residual is
    sup_i |T(x)_i - x_i| over the probed range.
    """
    op = as_operator(spec)
    _check_contractive(op, horizon)
    h = op.head_len
    head = tuple(op.e(i) / (1.0 - op.d(i)) for i in range(1, h + 1))
    if not op.d_tail.terms:
        # constant-coefficient tail: exact closed form
        tail = op.e_tail.scale(1.0 / (1.0 - op.d_tail.asym))
        point = Point(head, tail)
        return FixedPointWitness(point, _residual(op, point, max(h, 64)))
    solve_to = max(h, horizon)
    head = tuple(op.e(i) / (1.0 - op.d(i)) for i in range(1, solve_to + 1))
    tail = op.e_tail.scale(1.0 / (1.0 - op.d_tail.asym))
    point = Point(head, tail)
    return FixedPointWitness(point, _residual(op, point, solve_to))
