"""Binary scenario trees with per-node transition-probability intervals.

The backward sup-recursion on such a tree is the discrete conditional
nonlinear expectation with driver |z|: one step reads

    y = max over q in {q_lo, q_hi} of q*y_up + (1-q)*y_down,

attained at an endpoint because the objective is linear in q, and equals
(y_up+y_down)/2 + sqrt(dt)*|y_up-y_down|/2 for the symmetric interval
produced by the discrete drift bound |mu| <= 1 (q = (1 +/- sqrt(dt))/2).
The same tree induces a rectangular measure set (all corner choices of the
node probabilities) whose worst-case expectation reproduces the recursion,
which is how the tree plugs into the estimator machinery for comparison.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, GuardRefusalError
from .estimator import EstimatorResult, SolverConfig, solve_mmse
from .measures import Measure, MeasureSet
from .spaces import PartitionAlgebra, RandomVariable, SampleSpace

MAX_TREE_DEPTH = 6


@dataclass(frozen=True, eq=False)
class TreeModel:
    """Non-recombining binary tree; nodes carry an up-move probability interval.

    Non-leaf nodes are numbered heap-style: node (depth d, path p) has id
    2^d - 1 + p, with path bit 0 = up. Leaves are the depth-T paths, ordered
    by path value, and label the induced sample space ("uu", "ud", ...).
    """

    depth: int
    q_lo: np.ndarray = field(repr=False)
    q_hi: np.ndarray = field(repr=False)
    dt: float = 0.25

    def __init__(self, depth, q_lo, q_hi, dt=0.25):
        depth = int(depth)
        if depth < 1:
            raise ArgumentError("tree depth must be at least 1")
        if not dt > 0:
            raise ArgumentError("dt must be positive")
        nodes = 2 ** depth - 1
        q_lo = np.broadcast_to(np.asarray(q_lo, dtype=float), (nodes,)).copy()
        q_hi = np.broadcast_to(np.asarray(q_hi, dtype=float), (nodes,)).copy()
        if np.any(q_lo <= 0) or np.any(q_hi >= 1) or np.any(q_lo > q_hi):
            raise ArgumentError("need 0 < q_lo <= q_hi < 1 at every node")
        q_lo.flags.writeable = False
        q_hi.flags.writeable = False
        object.__setattr__(self, "depth", depth)
        object.__setattr__(self, "q_lo", q_lo)
        object.__setattr__(self, "q_hi", q_hi)
        object.__setattr__(self, "dt", float(dt))

    @classmethod
    def drift_bound(cls, depth: int, dt: float = 0.25) -> "TreeModel":
        """Interval [(1-sqrt(dt))/2, (1+sqrt(dt))/2] from the unit drift bound.

        Requires dt < 1 so the interval stays inside (0, 1); the default
        dt = 1/4 gives q in [1/4, 3/4].
        """
        if not 0 < dt < 1:
            raise ArgumentError("drift-bound tree needs 0 < dt < 1")
        root = math.sqrt(dt)
        return cls(depth, (1 - root) / 2.0, (1 + root) / 2.0, dt)

    @property
    def num_leaves(self) -> int:
        return 2 ** self.depth

    @property
    def num_internal(self) -> int:
        return 2 ** self.depth - 1

    def sample_space(self) -> SampleSpace:
        labels = []
        for leaf in range(self.num_leaves):
            bits = format(leaf, f"0{self.depth}b")
            labels.append(bits.replace("0", "u").replace("1", "d"))
        return SampleSpace(tuple(labels))

    def level_partition(self, level: int) -> PartitionAlgebra:
        """Leaves grouped by their first `level` moves."""
        if not 0 <= level <= self.depth:
            raise ArgumentError(f"level must lie in 0..{self.depth}")
        space = self.sample_space()
        shift = self.depth - level
        blocks = {}
        for leaf in range(self.num_leaves):
            blocks.setdefault(leaf >> shift, []).append(leaf)
        return PartitionAlgebra(space, [tuple(b) for b in blocks.values()])


def tree_measure_set(tm: TreeModel) -> MeasureSet:
    """All corner measures: each node independently at q_lo or q_hi.

    Refuses beyond depth 6 rather than subsample corners, which would silently
    change the represented set. Degenerate intervals contribute one choice, so
    a fully degenerate tree yields a single generator.
    """
    if tm.depth > MAX_TREE_DEPTH:
        raise GuardRefusalError(
            f"corner enumeration limited to depth {MAX_TREE_DEPTH}, got {tm.depth}"
        )
    space = tm.sample_space()
    choices = [
        (tm.q_lo[v],) if tm.q_lo[v] == tm.q_hi[v] else (tm.q_lo[v], tm.q_hi[v])
        for v in range(tm.num_internal)
    ]
    generators = []
    for corner in itertools.product(*choices):
        probs = np.ones(1)
        for d in range(tm.depth):
            q = np.array(corner[2 ** d - 1 : 2 ** (d + 1) - 1])
            nxt = np.empty(2 ** (d + 1))
            nxt[0::2] = probs * q
            nxt[1::2] = probs * (1.0 - q)
            probs = nxt
        generators.append(Measure(space, probs))
    return MeasureSet(generators)


@dataclass(frozen=True, eq=False)
class GExpResult:
    """Solution of the backward recursion: y per tree node, z per internal node.

    Node id layout matches TreeModel; leaves occupy ids 2^T - 1 .. 2^(T+1) - 2.
    """

    tree: TreeModel
    y: np.ndarray = field(repr=False)
    z: np.ndarray = field(repr=False)

    @property
    def root_value(self) -> float:
        return float(self.y[0])

    def level_values(self, level: int) -> np.ndarray:
        return self.y[2 ** level - 1 : 2 ** (level + 1) - 1]

    def level_variable(self, level: int) -> RandomVariable:
        """y at the given level, broadcast to the leaves below each node."""
        part = self.tree.level_partition(level)
        return part.broadcast(self.level_values(level))


def g_expectation(tm: TreeModel, xi_leaf, direction: str = "sup") -> GExpResult:
    """Backward recursion from the leaf values; direction "inf" flips the
    endpoint selection (used for the negation identity)."""
    xi_leaf = np.asarray(xi_leaf, dtype=float)
    if xi_leaf.shape != (tm.num_leaves,):
        raise ArgumentError(f"expected {tm.num_leaves} leaf values")
    if not np.all(np.isfinite(xi_leaf)):
        raise ArgumentError("leaf values must be finite")
    if direction not in ("sup", "inf"):
        raise ArgumentError("direction must be 'sup' or 'inf'")
    pick = np.maximum if direction == "sup" else np.minimum
    total = 2 ** (tm.depth + 1) - 1
    y = np.empty(total)
    z = np.empty(tm.num_internal)
    y[2 ** tm.depth - 1 :] = xi_leaf
    half_width = 2.0 * math.sqrt(tm.dt)
    for d in range(tm.depth - 1, -1, -1):
        lo, hi = 2 ** d - 1, 2 ** (d + 1) - 1
        child = y[hi : 2 ** (d + 2) - 1]
        y_up, y_dn = child[0::2], child[1::2]
        qlo, qhi = tm.q_lo[lo:hi], tm.q_hi[lo:hi]
        y[lo:hi] = pick(qlo * y_up + (1 - qlo) * y_dn, qhi * y_up + (1 - qhi) * y_dn)
        z[lo:hi] = (y_up - y_dn) / half_width
    return GExpResult(tree=tm, y=y, z=z)


@dataclass(frozen=True)
class GexpCompareReport:
    gexp_cond: RandomVariable
    mmse: RandomVariable
    sup_diff: float
    estimator: EstimatorResult


def compare_gexp_mmse(
    tm: TreeModel,
    xi_leaf,
    level: int,
    cfg: SolverConfig | None = None,
) -> GexpCompareReport:
    """Recursion values at a level versus the worst-case estimator there.

    The two disagree in general; the report carries the sup-norm difference
    and the full estimator result for auditing.
    """
    if not 0 <= level < tm.depth:
        raise ArgumentError(f"comparison level must lie in 0..{tm.depth - 1}")
    ms = tree_measure_set(tm)
    space = tm.sample_space()
    xi = RandomVariable(space, xi_leaf)
    part = tm.level_partition(level)
    gres = g_expectation(tm, xi_leaf)
    gexp_cond = gres.level_variable(level)
    est = solve_mmse(ms, xi, part, cfg)
    sup_diff = float(np.max(np.abs(gexp_cond.values - est.eta_hat.values)))
    return GexpCompareReport(
        gexp_cond=gexp_cond, mmse=est.eta_hat, sup_diff=sup_diff, estimator=est
    )
