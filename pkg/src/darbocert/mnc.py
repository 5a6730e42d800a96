"""Exact Hausdorff measure-of-noncompactness calculus on tail boxes.

The ambient space is the space of real sequences converging to zero under
the sup norm.  A set is described coordinatewise: finitely many explicit
head intervals for coordinates 1..h, and closed-form envelopes for every
coordinate beyond, where each envelope is a *tail form*

    f(i) = sum_j alpha_j * rho_j**i + beta,     0 <= rho_j < 1.

The asymptotic value of a tail form is its constant beta, so the Hausdorff
measure of noncompactness of a box is computable exactly:

    mu(box) = max(|beta_lo|, |beta_hi|)

(head coordinates span a finite-dimensional, hence relatively compact,
factor and never contribute).  An independent truncation oracle
``truncation_tail_sup`` recovers the same number by explicitly maximising
the envelopes over coordinates beyond a cut N.

Pointwise tail comparisons are resolved exactly through a dominance index:
once the geometric part of a form is smaller than |beta| the sign of the
form equals the sign of beta, and only finitely many earlier coordinates
need a direct check.  Forms with beta = 0 and mixed-sign coefficients are
checked up to a configurable horizon and flagged undecided beyond it.

Everything here is immutable and pure; concurrent use needs no locks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "DEFAULT_HORIZON",
    "MncError",
    "InvalidTailFormError",
    "InvalidBoxError",
    "InvalidPointError",
    "UndecidedComparisonError",
    "TailForm",
    "TailBox",
    "SetUnion",
    "Point",
    "MncValue",
    "hausdorff_mnc",
    "mnc_union",
    "conv_hull_mnc",
    "convex_combination",
    "subset",
    "scale_translate",
    "truncation_tail_sup",
    "closure",
    "contains_point",
    "eventual_sign",
    "is_nonnegative",
]

DEFAULT_HORIZON = 10_000

# Dominance indices beyond this are treated as out of practical range and
# reported undecided rather than scanned.
_DOMINANCE_CAP = 10_000_000

_SCAN_CHUNK = 1 << 16


class MncError(ValueError):
    """Base class for set-model failures."""


class InvalidTailFormError(MncError):
    pass


class InvalidBoxError(MncError):
    pass


class InvalidPointError(MncError):
    pass


class UndecidedComparisonError(MncError):
    """A beta = 0, mixed-sign tail comparison passed every pointwise check
    up to the horizon but cannot be certified beyond it."""


@dataclass(frozen=True)
class TailForm:
    """finite sum of geometric terms plus a constant, evaluated at i >= 1.

    ``terms`` is a tuple of (coefficient, ratio) pairs with 0 <= ratio < 1.
    Terms are normalised on construction: equal ratios merge, zero
    coefficients and ratio-zero terms drop (a ratio-zero term vanishes at
    every index >= 1).
    """

    terms: tuple[tuple[float, float], ...] = ()
    constant: float = 0.0

    def __post_init__(self):
        merged: dict[float, float] = {}
        for coeff, ratio in self.terms:
            coeff = float(coeff)
            ratio = float(ratio)
            if not (0.0 <= ratio < 1.0):
                raise InvalidTailFormError(f"ratio {ratio} outside [0, 1)")
            if not (math.isfinite(coeff) and math.isfinite(ratio)):
                raise InvalidTailFormError("non-finite term")
            merged[ratio] = merged.get(ratio, 0.0) + coeff
        norm = tuple(
            (coeff, ratio)
            for ratio, coeff in sorted(merged.items())
            if coeff != 0.0 and ratio != 0.0
        )
        object.__setattr__(self, "terms", norm)
        object.__setattr__(self, "constant", float(self.constant))
        if not math.isfinite(self.constant):
            raise InvalidTailFormError("non-finite constant")

    @property
    def asym(self) -> float:
        """Asymptotic value: lim_{i -> inf} f(i) = beta."""
        return self.constant

    def value(self, i: int) -> float:
        if i < 1:
            raise ValueError("tail forms are indexed from 1")
        return sum(c * r**i for c, r in self.terms) + self.constant

    def values(self, indices: np.ndarray) -> np.ndarray:
        out = np.full(indices.shape, self.constant, dtype=float)
        for coeff, ratio in self.terms:
            out += coeff * np.power(ratio, indices.astype(float))
        return out

    def coeff_abs_sum(self) -> float:
        return sum(abs(c) for c, _ in self.terms)

    def max_ratio(self) -> float:
        return max((r for _, r in self.terms), default=0.0)

    def geometric_bound(self, i: int) -> float:
        """Upper bound on |f(i) - beta|: sum |alpha_j| * rho_j**i."""
        return sum(abs(c) * r**i for c, r in self.terms)

    def __add__(self, other: "TailForm") -> "TailForm":
        return TailForm(self.terms + other.terms, self.constant + other.constant)

    def __sub__(self, other: "TailForm") -> "TailForm":
        return self + other.scale(-1.0)

    def scale(self, c: float) -> "TailForm":
        c = float(c)
        return TailForm(
            tuple((coeff * c, ratio) for coeff, ratio in self.terms),
            self.constant * c,
        )

    def __mul__(self, other: "TailForm") -> "TailForm":
        # (sum a r^i + b)(sum a' r'^i + b'): product ratios r*r' stay in [0,1)
        terms: list[tuple[float, float]] = []
        for c1, r1 in self.terms:
            for c2, r2 in other.terms:
                terms.append((c1 * c2, r1 * r2))
        for c2, r2 in other.terms:
            terms.append((self.constant * c2, r2))
        for c1, r1 in self.terms:
            terms.append((other.constant * c1, r1))
        return TailForm(tuple(terms), self.constant * other.constant)

    def dominance_index(self, start: int = 1) -> int:
        """Smallest index >= start from which the geometric part is
        strictly dominated by |beta|.  Only meaningful for beta != 0."""
        if not self.terms:
            return start
        total = self.coeff_abs_sum()
        beta = abs(self.constant)
        if beta == 0.0:
            raise InvalidTailFormError("dominance index undefined for beta = 0")
        if total < beta:
            return start
        rho = self.max_ratio()
        # total * rho**i < beta  <=>  i > log(beta/total)/log(rho)
        raw = math.log(beta / total) / math.log(rho)
        idx = int(math.floor(raw)) + 1
        while total * rho**idx >= beta:  # guard the float log estimate
            idx += 1
        return max(start, idx)


def eventual_sign(form: TailForm, start: int = 1, horizon: int = DEFAULT_HORIZON) -> tuple[int, int]:
    """Return (sign, from_index): the constant sign of ``form`` on every
    index >= from_index, with sign in {-1, 0, +1} (+1 means >= 0, -1 means
    <= 0, 0 means identically zero).

    Raises UndecidedComparisonError for beta = 0, mixed-sign forms whose
    sign past the horizon cannot be certified.
    """
    beta = form.constant
    if not form.terms:
        if beta > 0:
            return (1, start)
        if beta < 0:
            return (-1, start)
        return (0, start)
    if beta > 0:
        return (1, form.dominance_index(start))
    if beta < 0:
        return (-1, form.dominance_index(start))
    coeffs = [c for c, _ in form.terms]
    if all(c > 0 for c in coeffs):
        return (1, start)
    if all(c < 0 for c in coeffs):
        return (-1, start)
    raise UndecidedComparisonError(
        f"sign of mixed beta=0 form undecidable past horizon {horizon}"
    )


def _first_negative(form: TailForm, start: int, stop: int) -> int | None:
    """First index i in [start, stop] with form(i) < 0, scanning in chunks."""
    i = start
    while i <= stop:
        hi = min(stop, i + _SCAN_CHUNK - 1)
        idx = np.arange(i, hi + 1, dtype=np.int64)
        vals = form.values(idx)
        bad = np.nonzero(vals < 0.0)[0]
        if bad.size:
            return int(idx[bad[0]])
        i = hi + 1
    return None


def is_nonnegative(form: TailForm, start: int = 1, horizon: int = DEFAULT_HORIZON) -> bool:
    """Exactly decide form(i) >= 0 for every integer i >= start.

    Forms with beta != 0 are decided via the dominance index; beta = 0
    forms with single-signed coefficients are decided directly; beta = 0
    forms with mixed signs are scanned up to ``horizon`` and raise
    UndecidedComparisonError if nothing failed by then.
    """
    beta = form.constant
    if not form.terms:
        return beta >= 0.0
    if beta != 0.0:
        idx = form.dominance_index(start)
        if idx - start > _DOMINANCE_CAP:
            raise UndecidedComparisonError(
                f"dominance index {idx} exceeds practical range"
            )
        if beta < 0.0:
            return False
        return _first_negative(form, start, idx) is None
    coeffs = [c for c, _ in form.terms]
    if all(c > 0 for c in coeffs):
        return True
    if all(c < 0 for c in coeffs):
        return False
    witness = _first_negative(form, start, horizon)
    if witness is not None:
        return False
    raise UndecidedComparisonError(
        f"mixed beta=0 form nonnegative up to horizon {horizon}, undecided beyond"
    )


# Indices sampled when validating that a box's lower envelope stays below
# its upper one (the check is sampled by design; the asymptotic comparison
# is exact).
_VALIDATION_SAMPLES = tuple(range(1, 65)) + tuple(2**j for j in range(7, 21))


@dataclass(frozen=True)
class TailBox:
    """Closed convex coordinatewise-interval set: explicit head intervals
    for coordinates 1..h, tail-form envelopes beyond."""

    head_lo: tuple[float, ...] = ()
    head_hi: tuple[float, ...] = ()
    tail_lo: TailForm = TailForm()
    tail_hi: TailForm = TailForm()

    def __post_init__(self):
        object.__setattr__(self, "head_lo", tuple(float(x) for x in self.head_lo))
        object.__setattr__(self, "head_hi", tuple(float(x) for x in self.head_hi))
        if len(self.head_lo) != len(self.head_hi):
            raise InvalidBoxError("head arrays differ in length")
        for k, (lo, hi) in enumerate(zip(self.head_lo, self.head_hi), start=1):
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise InvalidBoxError(f"non-finite head interval at coordinate {k}")
            if lo > hi:
                raise InvalidBoxError(f"empty head interval at coordinate {k}: [{lo}, {hi}]")
        if not (self.tail_lo.asym <= 0.0 <= self.tail_hi.asym):
            raise InvalidBoxError(
                "box is empty in the null-sequence space: needs "
                f"asym(lo) <= 0 <= asym(hi), got {self.tail_lo.asym} and {self.tail_hi.asym}"
            )
        h = len(self.head_lo)
        for i in _VALIDATION_SAMPLES:
            j = h + i
            if self.tail_lo.value(j) > self.tail_hi.value(j):
                raise InvalidBoxError(f"tail envelopes cross at coordinate {j}")

    @property
    def head_len(self) -> int:
        return len(self.head_lo)

    def lo(self, i: int) -> float:
        if i < 1:
            raise ValueError("coordinates are indexed from 1")
        if i <= self.head_len:
            return self.head_lo[i - 1]
        return self.tail_lo.value(i)

    def hi(self, i: int) -> float:
        if i < 1:
            raise ValueError("coordinates are indexed from 1")
        if i <= self.head_len:
            return self.head_hi[i - 1]
        return self.tail_hi.value(i)


@dataclass(frozen=True)
class SetUnion:
    """Finite union of tail boxes (generally non-convex)."""

    boxes: tuple[TailBox, ...]

    def __post_init__(self):
        object.__setattr__(self, "boxes", tuple(self.boxes))
        if not self.boxes:
            raise InvalidBoxError("empty union")


@dataclass(frozen=True)
class Point:
    """A single element of the null-sequence space: explicit head values
    plus a tail form whose asymptotic value must be zero."""

    head: tuple[float, ...] = ()
    tail: TailForm = TailForm()

    def __post_init__(self):
        object.__setattr__(self, "head", tuple(float(x) for x in self.head))
        if self.tail.asym != 0.0:
            raise InvalidPointError(
                f"asymptotic value {self.tail.asym} != 0: not a null sequence"
            )

    @property
    def head_len(self) -> int:
        return len(self.head)

    def value(self, i: int) -> float:
        if i < 1:
            raise ValueError("coordinates are indexed from 1")
        if i <= len(self.head):
            return self.head[i - 1]
        return self.tail.value(i)


ZERO_POINT = Point()


@dataclass(frozen=True)
class MncValue:
    """Measure-of-noncompactness value; zero exactly when the set is
    relatively compact in this model (all envelopes vanish asymptotically)."""

    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))
        if self.value < 0.0:
            raise MncError("mnc value must be nonnegative")

    @property
    def relatively_compact(self) -> bool:
        return self.value == 0.0

    def __float__(self) -> float:
        return self.value


def hausdorff_mnc(box: TailBox) -> MncValue:
    """Hausdorff measure of noncompactness of a tail box.

    Equals max(|asym(lo)|, |asym(hi)|); the finitely many head coordinates
    never contribute.
    """
    return MncValue(max(abs(box.tail_lo.asym), abs(box.tail_hi.asym)))


def mnc_union(union: SetUnion) -> MncValue:
    """Measure of a finite union: the max over member boxes (consistent
    with monotonicity and with the convex-hull rewrite, see conv_hull_mnc)."""
    return MncValue(max(hausdorff_mnc(b).value for b in union.boxes))


def conv_hull_mnc(union: SetUnion) -> MncValue:
    """Measure assigned to the closed convex hull of a union of boxes.

    The hull's coordinatewise envelope is [min_j lo_j(i), max_j hi_j(i)],
    whose asymptotic values are min_j beta_lo_j and max_j beta_hi_j; the
    measure follows without materialising the (generally non-tail-form)
    pointwise min/max.
    """
    lo = min(b.tail_lo.asym for b in union.boxes)
    hi = max(b.tail_hi.asym for b in union.boxes)
    return MncValue(max(abs(lo), abs(hi)))


def closure(box: TailBox) -> TailBox:
    """Tail boxes are closed; closure is the identity."""
    return box


def convex_combination(lam: float, a: TailBox, b: TailBox) -> TailBox:
    """Coordinatewise Minkowski combination lam*A + (1-lam)*B."""
    lam = float(lam)
    if not 0.0 <= lam <= 1.0:
        raise MncError(f"lambda {lam} outside [0, 1]")
    if lam == 1.0:
        return a
    if lam == 0.0:
        return b
    mu = 1.0 - lam
    h = max(a.head_len, b.head_len)
    head_lo = tuple(lam * a.lo(i) + mu * b.lo(i) for i in range(1, h + 1))
    head_hi = tuple(lam * a.hi(i) + mu * b.hi(i) for i in range(1, h + 1))
    return TailBox(
        head_lo,
        head_hi,
        a.tail_lo.scale(lam) + b.tail_lo.scale(mu),
        a.tail_hi.scale(lam) + b.tail_hi.scale(mu),
    )


def subset(a: TailBox, b: TailBox, horizon: int = DEFAULT_HORIZON) -> bool:
    """Exactly decide A subseteq B.

    Heads (padded against the tails where lengths differ) are compared
    directly; tail comparisons go through the dominance machinery.  Raises
    UndecidedComparisonError in the genuinely undecidable beta = 0 case.
    """
    h = max(a.head_len, b.head_len)
    for i in range(1, h + 1):
        if b.lo(i) > a.lo(i) or a.hi(i) > b.hi(i):
            return False
    start = h + 1
    return is_nonnegative(a.tail_lo - b.tail_lo, start, horizon) and is_nonnegative(
        b.tail_hi - a.tail_hi, start, horizon
    )


def contains_point(box: TailBox, p: Point, horizon: int = DEFAULT_HORIZON) -> bool:
    """Exactly decide membership of a point in a box."""
    h = max(box.head_len, p.head_len)
    for i in range(1, h + 1):
        if not box.lo(i) <= p.value(i) <= box.hi(i):
            return False
    start = h + 1
    return is_nonnegative(p.tail - box.tail_lo, start, horizon) and is_nonnegative(
        box.tail_hi - p.tail, start, horizon
    )


def scale_translate(a: TailBox, c: float, shift: Point = ZERO_POINT) -> TailBox:
    """Coordinatewise c*[lo, hi] + shift.  The shift must be a genuine
    member of the space (asymptotic value zero); the measure of the result
    is |c| times the measure of A, exactly."""
    if not isinstance(shift, Point):
        raise InvalidPointError("shift must be a Point with asymptotic value zero")
    c = float(c)
    h = max(a.head_len, shift.head_len)
    head_lo = []
    head_hi = []
    for i in range(1, h + 1):
        x, y = c * a.lo(i), c * a.hi(i)
        s = shift.value(i)
        head_lo.append(min(x, y) + s)
        head_hi.append(max(x, y) + s)
    if c >= 0.0:
        tail_lo = a.tail_lo.scale(c) + shift.tail
        tail_hi = a.tail_hi.scale(c) + shift.tail
    else:
        tail_lo = a.tail_hi.scale(c) + shift.tail
        tail_hi = a.tail_lo.scale(c) + shift.tail
    return TailBox(tuple(head_lo), tuple(head_hi), tail_lo, tail_hi)


_ORACLE_WINDOW = 4096
_ORACLE_DYADIC_MAX = 62


def _tail_abs_sup(form_lo: TailForm, form_hi: TailForm, n_cut: int) -> float:
    """sup over i > n_cut of max(|lo(i)|, |hi(i)|) by explicit maximisation:
    a contiguous window, a dyadic ladder and the asymptotic values."""
    best = max(abs(form_lo.asym), abs(form_hi.asym))
    idx = np.arange(n_cut + 1, n_cut + _ORACLE_WINDOW + 1, dtype=np.int64)
    window = np.maximum(np.abs(form_lo.values(idx)), np.abs(form_hi.values(idx)))
    best = max(best, float(window.max()))
    probe = n_cut + _ORACLE_WINDOW
    for _ in range(_ORACLE_DYADIC_MAX):
        probe *= 2
        if probe > 2**62:
            break
        best = max(best, abs(form_lo.value(probe)), abs(form_hi.value(probe)))
    return best


def truncation_tail_sup(box: TailBox, n_cut: int) -> float:
    """Independent truncation oracle: sup over coordinates i > n_cut of
    max(|lo_i|, |hi_i|).  Converges to hausdorff_mnc(box) as n_cut grows.

    ``n_cut`` must be at least the head length (so only the closed-form
    tails are involved).
    """
    if n_cut < box.head_len:
        raise MncError(f"cut {n_cut} smaller than head length {box.head_len}")
    return _tail_abs_sup(box.tail_lo, box.tail_hi, n_cut)
