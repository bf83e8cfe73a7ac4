"""Node-probability-table generation for ranked and numeric nodes.

Ranked nodes live on an ordinal scale mapped onto [0, 1]: state i of a
k-state node covers the interval [i/k, (i+1)/k] with midpoint (i+0.5)/k.
NPT rows come from a Normal distribution doubly truncated to the node's
value range, integrated over the child's state intervals. Three row
families are provided: weighted means of parent values (activity/factor
aggregation), partitioned yes/no indicators (measure nodes), and affine
arithmetic maps onto a discretized numeric range (metric nodes).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import NptError
from .qmodel import Polarity

_SQRT2 = math.sqrt(2.0)

DEFAULT_LABELS = {
    2: ("low", "high"),
    3: ("low", "medium", "high"),
    4: ("very-low", "low", "high", "very-high"),
    5: ("very-low", "low", "medium", "high", "very-high"),
}


def _phi(z: float) -> float:
    """Standard Normal CDF via the error function (abs error <= 1e-12)."""
    return 0.5 * (1.0 + math.erf(z / _SQRT2))


@dataclass(frozen=True)
class RankedScale:
    """Ordinal scale of k >= 2 equal-width states over [0, 1]."""

    state_count: int
    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.state_count < 2:
            raise NptError(f"ranked scale needs >= 2 states, got {self.state_count}")
        if len(self.labels) != self.state_count:
            raise NptError(
                f"expected {self.state_count} labels, got {len(self.labels)}"
            )

    @classmethod
    def of(cls, state_count: int) -> "RankedScale":
        labels = DEFAULT_LABELS.get(state_count)
        if labels is None:
            labels = tuple(f"s{i + 1}" for i in range(state_count))
        return cls(state_count, labels)

    @property
    def midpoints(self) -> tuple[float, ...]:
        k = self.state_count
        return tuple((i + 0.5) / k for i in range(k))

    @property
    def boundaries(self) -> tuple[float, ...]:
        k = self.state_count
        return tuple(i / k for i in range(k + 1))


@dataclass(frozen=True)
class BinScale:
    """Numeric range [lo, hi] discretized into equal-width bins."""

    lo: float
    hi: float
    bin_count: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lo) and math.isfinite(self.hi) and self.lo < self.hi):
            raise NptError(f"degenerate bin range [{self.lo}, {self.hi}]")
        if self.bin_count < 2:
            raise NptError(f"need >= 2 bins, got {self.bin_count}")

    @property
    def midpoints(self) -> tuple[float, ...]:
        width = (self.hi - self.lo) / self.bin_count
        return tuple(self.lo + (i + 0.5) * width for i in range(self.bin_count))

    @property
    def boundaries(self) -> tuple[float, ...]:
        width = (self.hi - self.lo) / self.bin_count
        bounds = [self.lo + i * width for i in range(self.bin_count)]
        bounds.append(self.hi)
        return tuple(bounds)

    @property
    def labels(self) -> tuple[str, ...]:
        bounds = self.boundaries
        return tuple(
            f"[{bounds[i]:.6g}, {bounds[i + 1]:.6g})" for i in range(self.bin_count)
        )


@dataclass(eq=False)
class Npt:
    """Conditional probability rows, one per parent state combination.

    Rows are ordered row-major over the parent tuple: the first parent
    varies slowest. Every row is a distribution over the child states.
    """

    child_states: int
    parent_state_counts: tuple[int, ...]
    rows: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        expected = int(np.prod(self.parent_state_counts)) if self.parent_state_counts else 1
        rows = np.asarray(self.rows, dtype=float)
        if rows.shape != (expected, self.child_states):
            raise NptError(
                f"NPT shape {rows.shape} does not match "
                f"{expected} parent combos x {self.child_states} child states"
            )
        if np.any(rows < -1e-12) or np.any(rows > 1.0 + 1e-12):
            raise NptError("NPT entries must lie in [0, 1]")
        sums = rows.sum(axis=1)
        worst = float(np.max(np.abs(sums - 1.0))) if rows.size else 0.0
        if worst > 1e-9:
            raise NptError(f"NPT rows must sum to 1 (worst deviation {worst:.3g})")
        rows = np.clip(rows, 0.0, 1.0)
        rows.flags.writeable = False
        self.rows = rows

    def parent_combos(self) -> Iterator[tuple[int, ...]]:
        return itertools.product(*(range(k) for k in self.parent_state_counts))

    def row_for(self, combo: Sequence[int]) -> np.ndarray:
        index = 0
        for count, state in zip(self.parent_state_counts, combo):
            if not 0 <= state < count:
                raise NptError(f"parent state {state} out of range (0..{count - 1})")
            index = index * count + state
        return self.rows[index]


@dataclass(frozen=True)
class WmeanSpec:
    """Weighted-mean aggregation of parent values into a child level.

    Negative polarity reflects the parent value (v -> 1 - v) before the
    mean, so a high-valued hindering parent pulls the child down.
    """

    weights: tuple[float, ...]
    polarities: tuple[Polarity, ...]
    sigma: float = 0.2
    prior_mean: float = 0.5

    def __post_init__(self) -> None:
        if len(self.weights) != len(self.polarities):
            raise NptError("one polarity per weight required")
        if any(not isinstance(p, Polarity) for p in self.polarities):
            raise NptError(f"polarities must be Polarity values: {self.polarities}")
        if any(not math.isfinite(w) or w <= 0.0 for w in self.weights):
            raise NptError(f"weights must be finite and positive: {self.weights}")
        if not math.isfinite(self.sigma) or self.sigma <= 0.0:
            raise NptError(f"sigma must be finite and positive, got {self.sigma}")


@dataclass(frozen=True)
class PartitionSpec:
    """Per-parent-state probability of the child's 'yes' state."""

    yes_probability: tuple[float, ...]

    def __post_init__(self) -> None:
        if any(p < 0.0 or p > 1.0 for p in self.yes_probability):
            raise NptError("partition probabilities must lie in [0, 1]")

    @classmethod
    def from_diagnosticity(cls, state_count: int, epsilon: float) -> "PartitionSpec":
        """Linear inverse mapping: lowest parent state -> yes with 1 - epsilon,
        highest -> yes with epsilon."""
        if not (0.0 < epsilon <= 0.5):
            raise NptError(f"epsilon must lie in (0, 0.5], got {epsilon}")
        k = state_count
        step = (1.0 - 2.0 * epsilon) / (k - 1)
        return cls(tuple((1.0 - epsilon) - i * step for i in range(k)))

    def to_npt(self) -> Npt:
        rows = np.array([[1.0 - p, p] for p in self.yes_probability])
        return Npt(child_states=2,
                   parent_state_counts=(len(self.yes_probability),),
                   rows=rows)


@dataclass(frozen=True)
class AffineExpr:
    """Affine map value -> scale * value + offset."""

    scale: float
    offset: float = 0.0

    def __call__(self, value: float) -> float:
        return self.scale * value + self.offset


def tnormal_cdf(x: float, mu: float, sigma: float) -> float:
    """CDF at `x` of a Normal(mu, sigma^2) doubly truncated to [0, 1].

    Returns 0 for x <= 0 and 1 for x >= 1.
    """
    return _tnormal_cdf(x, mu, sigma, 0.0, 1.0)


def _tnormal_cdf(x: float, mu: float, sigma: float, lo: float, hi: float) -> float:
    if not all(map(math.isfinite, (x, mu, sigma, lo, hi))):
        raise NptError(f"non-finite input to truncated-Normal CDF: "
                       f"x={x}, mu={mu}, sigma={sigma}")
    if sigma <= 0.0:
        raise NptError(f"sigma must be > 0, got {sigma}")
    if x <= lo:
        return 0.0
    if x >= hi:
        return 1.0
    low = _phi((lo - mu) / sigma)
    span = _phi((hi - mu) / sigma) - low
    if span <= 0.0:
        # Phi underflows when mu sits many sigmas outside [lo, hi]; the
        # truncated distribution degenerates to a point mass at the
        # nearest boundary.
        return 0.0 if mu >= hi else 1.0
    return min(max((_phi((x - mu) / sigma) - low) / span, 0.0), 1.0)


def _tnormal_row(mu: float, sigma: float, boundaries: Sequence[float]) -> np.ndarray:
    lo, hi = boundaries[0], boundaries[-1]
    cdf = [0.0]
    cdf.extend(_tnormal_cdf(b, mu, sigma, lo, hi) for b in boundaries[1:-1])
    cdf.append(1.0)
    row = np.diff(np.asarray(cdf))
    return np.maximum(row, 0.0)


def ranked_npt(parents: Sequence[RankedScale], child: RankedScale,
               spec: WmeanSpec) -> Npt:
    """NPT where the child level is a weighted mean of parent values.

    For each parent state combination the effective value of parent i is
    its state midpoint (positive polarity) or one minus it (negative);
    the child row is a truncated Normal centred on the weighted mean.
    A parentless node yields a single prior row centred on
    `spec.prior_mean`.
    """
    if len(spec.weights) != len(parents):
        raise NptError(
            f"{len(parents)} parents but {len(spec.weights)} weights"
        )
    boundaries = child.boundaries
    if not parents:
        row = _tnormal_row(spec.prior_mean, spec.sigma, boundaries)
        return Npt(child.state_count, (), row.reshape(1, -1))

    total_weight = sum(spec.weights)
    midpoint_sets = [p.midpoints for p in parents]
    rows = []
    for combo in itertools.product(*(range(p.state_count) for p in parents)):
        mu = 0.0
        for weight, polarity, mids, state in zip(
                spec.weights, spec.polarities, midpoint_sets, combo):
            value = mids[state]
            if polarity is Polarity.NEGATIVE:
                value = 1.0 - value
            mu += weight * value
        mu /= total_weight
        rows.append(_tnormal_row(mu, spec.sigma, boundaries))
    return Npt(child.state_count,
               tuple(p.state_count for p in parents),
               np.vstack(rows))


def partitioned_npt(parent: RankedScale, epsilon: float) -> Npt:
    """Inverse yes/no indicator NPT for a measure node.

    The lowest parent state implies 'yes' with probability 1 - epsilon,
    the highest with epsilon, interpolating linearly in between. Child
    state order is (no, yes).
    """
    spec = PartitionSpec.from_diagnosticity(parent.state_count, epsilon)
    return spec.to_npt()


def arithmetic_npt(parent: RankedScale, value_range: tuple[float, float],
                   bin_count: int, expr: Callable[[float], float],
                   sigma: float) -> Npt:
    """NPT mapping parent levels onto a discretized numeric child.

    For each parent state the child row is a Normal centred on
    `expr(midpoint)`, truncated to `value_range` and integrated per bin.
    """
    lo, hi = value_range
    scale = BinScale(lo, hi, bin_count)  # validates range and bin count
    if not math.isfinite(sigma) or sigma <= 0.0:
        raise NptError(f"sigma must be finite and positive, got {sigma}")
    boundaries = scale.boundaries
    rows = []
    for midpoint in parent.midpoints:
        mu = float(expr(midpoint))
        if not math.isfinite(mu):
            raise NptError(f"expression produced non-finite value for {midpoint}")
        rows.append(_tnormal_row(mu, sigma, boundaries))
    return Npt(bin_count, (parent.state_count,), np.vstack(rows))


def explicit_npt(rows: Sequence[Sequence[float]],
                 parent_state_counts: tuple[int, ...] = ()) -> Npt:
    """Wrap literal probability rows (e.g. from a model file) as an NPT."""
    array = np.asarray(rows, dtype=float)
    if array.ndim != 2:
        raise NptError("explicit NPT rows must form a 2-d table")
    counts = parent_state_counts or ((array.shape[0],) if array.shape[0] > 1 else ())
    return Npt(array.shape[1], counts, array)
