"""Probability measures, finite-generator measure sets and conditional expectations.

A MeasureSet lists finitely many generator measures; the set it represents is
their convex hull. Every functional this package maximizes over the set is
linear in the measure, so the sup over the hull is attained at a generator.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    AbsoluteContinuityError,
    ArgumentError,
    StructuralError,
    ZeroMassBlockError,
)
from .spaces import (
    PartitionAlgebra,
    RandomVariable,
    SampleSpace,
    _frozen_array,
    check_same_space,
)

SIMPLEX_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Measure:
    """A probability vector; weights are renormalized exactly after validation."""

    space: SampleSpace
    weights: np.ndarray = field(repr=False)

    def __init__(self, space, weights):
        w = np.array(weights, dtype=float)
        if w.ndim != 1 or len(w) != space.n:
            raise StructuralError(f"expected {space.n} weights, got shape {w.shape}")
        if np.any(w < 0):
            raise ArgumentError("measure weights must be nonnegative")
        total = w.sum()
        if abs(total - 1.0) > SIMPLEX_TOL:
            raise ArgumentError(f"weights sum to {total!r}, not 1")
        if total != 1.0:
            w = w / total
        w = _frozen_array(w)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "weights", w)

    def __eq__(self, other):
        if not isinstance(other, Measure):
            return NotImplemented
        return self.space == other.space and np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash((self.space, self.weights.tobytes()))

    def mass(self, indices) -> float:
        return float(np.sum(self.weights[list(indices)]))


@dataclass(frozen=True, eq=False)
class MeasureSet:
    """A nonempty generator list whose convex hull is the represented set."""

    space: SampleSpace
    generators: tuple[Measure, ...]

    def __init__(self, generators):
        generators = tuple(generators)
        if not generators:
            raise ArgumentError("a measure set needs at least one generator")
        space = check_same_space(*generators)
        if len(set(generators)) != len(generators):
            # duplicates do not change the hull but make mixture weights ambiguous
            warnings.warn("measure set contains duplicate generators", stacklevel=2)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "generators", generators)

    def __eq__(self, other):
        if not isinstance(other, MeasureSet):
            return NotImplemented
        return self.generators == other.generators

    def __hash__(self):
        return hash(self.generators)

    def __len__(self):
        return len(self.generators)

    @cached_property
    def weights_matrix(self) -> np.ndarray:
        """Generators stacked as a (K, n) array; cached for vectorized loops."""
        m = np.stack([g.weights for g in self.generators])
        m.flags.writeable = False
        return m


@dataclass(frozen=True, eq=False)
class MixtureWeights:
    """Simplex coordinates over the generator list of a MeasureSet."""

    lam: np.ndarray = field(repr=False)

    def __init__(self, lam):
        lam = np.array(lam, dtype=float)
        if lam.ndim != 1 or len(lam) == 0:
            raise ArgumentError("mixture weights must be a nonempty vector")
        if np.any(lam < -SIMPLEX_TOL):
            raise ArgumentError("mixture weights must be nonnegative")
        total = lam.sum()
        if abs(total - 1.0) > SIMPLEX_TOL:
            raise ArgumentError(f"mixture weights sum to {total!r}, not 1")
        lam = np.clip(lam, 0.0, None)
        if lam.sum() != 1.0:
            lam = lam / lam.sum()
        object.__setattr__(self, "lam", _frozen_array(lam))

    def __eq__(self, other):
        if not isinstance(other, MixtureWeights):
            return NotImplemented
        return np.array_equal(self.lam, other.lam)

    def __len__(self):
        return len(self.lam)


def expectation(p: Measure, x: RandomVariable) -> float:
    check_same_space(p, x)
    return float(np.dot(p.weights, x.values))


def conditional_expectation(
    p: Measure,
    x: RandomVariable,
    c: PartitionAlgebra,
    zero_block_policy: str = "error",
) -> RandomVariable:
    """Blockwise average of x under p, broadcast back to the sample points.

    zero_block_policy: "error" raises on a zero-mass block;
    "fill_with_unconditional" writes E_p[x] there instead (exploratory use only).
    """
    check_same_space(p, x, c)
    if zero_block_policy not in ("error", "fill_with_unconditional"):
        raise ArgumentError(f"unknown zero_block_policy {zero_block_policy!r}")
    out = np.empty(c.num_blocks)
    for j, b in enumerate(c.blocks):
        idx = list(b)
        mass = float(np.sum(p.weights[idx]))
        if mass <= 0.0:
            if zero_block_policy == "error":
                raise ZeroMassBlockError(b)
            out[j] = expectation(p, x)
        else:
            out[j] = float(np.dot(p.weights[idx], x.values[idx])) / mass
    return c.broadcast(out)


def mix(ms: MeasureSet, w: MixtureWeights) -> Measure:
    """The convex combination of the generators with the given simplex weights."""
    if len(w) != len(ms):
        raise ArgumentError(
            f"{len(w)} mixture weights for {len(ms)} generators"
        )
    return Measure(ms.space, w.lam @ ms.weights_matrix)


def reference_measure(ms: MeasureSet) -> Measure:
    """Uniform mixture of the generators; dominates every element of the hull."""
    return Measure(ms.space, ms.weights_matrix.mean(axis=0))


def is_proper(ms: MeasureSet) -> bool:
    """True iff every generator charges every point charged by the reference.

    On a finite hull this is mutual equivalence of all elements with the
    reference measure: no generator may kill a point another one charges.
    """
    charged = ms.weights_matrix.sum(axis=0) > 0.0
    return bool(np.all(ms.weights_matrix[:, charged] > 0.0))


def density(p: Measure, p0: Measure) -> RandomVariable:
    """Pointwise dP/dP0 with the 0/0 := 0 convention."""
    check_same_space(p, p0)
    bad = (p0.weights == 0.0) & (p.weights > 0.0)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise AbsoluteContinuityError(
            f"measure charges point {p.space.labels[i]} which the reference does not"
        )
    out = np.zeros(p.space.n)
    pos = p0.weights > 0.0
    out[pos] = p.weights[pos] / p0.weights[pos]
    return RandomVariable(p.space, out)
