"""Built-in scenario pieces used by the demo command and the test suite."""

from __future__ import annotations

from .expr import parse_expr
from .mnc import TailBox, TailForm
from .operators import DiagonalAffineOperator
from .shifting import FunctionSequencePair

__all__ = [
    "demo_pair",
    "broken_pair",
    "unit_box",
    "compact_geometric_box",
    "scaling_operator",
    "identity_operator",
]


def demo_pair() -> FunctionSequencePair:
    """The rational pair psi_n(t) = (2n(1+t)+2t+1)/(n+1) and
    phi_n(t) = (n(2+t)+1)/n with limits 2+2t and 2+t."""
    return FunctionSequencePair(
        psi_seq=parse_expr("(2*n*(1+t)+2*t+1)/(n+1)"),
        phi_seq=parse_expr("(n*(2+t)+1)/n"),
        psi_limit=parse_expr("2+2*t"),
        phi_limit=parse_expr("2+t"),
    )


def broken_pair() -> FunctionSequencePair:
    """psi = t, phi = t + 1 (constant in n): fails conditions (i), (ii)."""
    return FunctionSequencePair(
        psi_seq=parse_expr("t"),
        phi_seq=parse_expr("t+1"),
        psi_limit=parse_expr("t"),
        phi_limit=parse_expr("t+1"),
    )


def unit_box() -> TailBox:
    """Constant envelopes -1 and +1 on every coordinate: mu = 1."""
    return TailBox((), (), TailForm((), -1.0), TailForm((), 1.0))


def compact_geometric_box(coeff: float = 2.0, ratio: float = 0.5) -> TailBox:
    """Envelopes 0 and coeff*ratio**i: vanishing tails, mu = 0."""
    return TailBox((), (), TailForm((), 0.0), TailForm(((coeff, ratio),), 0.0))


def scaling_operator(c: float) -> DiagonalAffineOperator:
    """x_i -> c * x_i on every coordinate."""
    return DiagonalAffineOperator((), TailForm((), c), (), TailForm((), 0.0))


def identity_operator() -> DiagonalAffineOperator:
    return scaling_operator(1.0)
