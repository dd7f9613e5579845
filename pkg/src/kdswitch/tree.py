"""Online k-d tree in which every arriving point splits the leaf it lands in.

Split axes are drawn uniformly at random from a seeded generator; the pivot
is the arriving point itself.  A cell remembers at which position of its own
subsequence it was split (``split_index``), which the predictor needs to
decide when the recursion into children becomes active.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

from .kt import SymbolCounts

LOG_HALF = math.log(0.5)

_AXIS_BUFFER = 1024


class Sample:
    """A feature point plus its label; the label is None until observed."""

    __slots__ = ("point", "label")

    def __init__(self, point: tuple, label: Optional[int] = None) -> None:
        self.point = point
        self.label = label

    def __repr__(self) -> str:
        return f"Sample({self.point!r}, {self.label!r})"


class Node:
    """One cell of the partition.

    A node is either a leaf (``stored`` holds its samples, ``axis`` is None)
    or internal (``left``/``right`` set, ``stored`` is None).  ``counts``
    accumulates the labels observed while the point stream visits this cell;
    ``log_wa``/``log_wb`` are the two expert weights in natural-log domain.
    ``split_index`` is None while the cell is unsplit, then the 1-based index
    of the sample (within this cell's own subsequence) whose arrival split it.
    """

    __slots__ = (
        "axis",
        "value",
        "left",
        "right",
        "stored",
        "counts",
        "log_wa",
        "log_wb",
        "split_index",
    )

    def __init__(self, alphabet_size: int) -> None:
        self.axis: Optional[int] = None
        self.value: Optional[float] = None
        self.left: Optional[Node] = None
        self.right: Optional[Node] = None
        self.stored: Optional[list[Sample]] = []
        self.counts = SymbolCounts(alphabet_size)
        self.log_wa = LOG_HALF
        self.log_wb = LOG_HALF
        self.split_index: Optional[int] = None

    @property
    def is_leaf(self) -> bool:
        return self.axis is None

    @property
    def m(self) -> int:
        """Number of labeled samples observed in this cell."""
        return self.counts.total


class KdSwitchTree:
    """One randomized partitioning tree plus its predictor configuration.

    mode:        "switch" (switching rate 1/m at a cell that has seen m
                 samples) or "ctw" (no switching; fixed mixture over prunings).
    label_prior: optional tuple of symbol probabilities.  When given, the
                 root cell's own estimator is replaced by this fixed
                 distribution (the prior is known, so nothing is learned at
                 the root level).  ``prior_scope`` chooses whether the
                 replacement covers every root-level estimate ("all") or only
                 the root's memoryless expert ("model-a"); the two behave
                 identically under the standard feed protocol.
    """

    __slots__ = (
        "dimension",
        "alphabet_size",
        "mode",
        "label_prior",
        "prior_scope",
        "rng",
        "root",
        "cumulative_logprob",
        "n",
        "_pending",
        "_axis_buf",
        "_axis_pos",
        "_depth_sum",
        "_depth_max",
        "_depth_hist",
        "_depth_count",
    )

    def __init__(
        self,
        dimension: int,
        alphabet_size: int = 2,
        seed=0,
        mode: str = "switch",
        label_prior: Optional[Sequence[float]] = None,
        prior_scope: str = "all",
    ) -> None:
        if dimension < 1:
            raise ValueError(f"dimension must be >= 1, got {dimension}")
        if mode not in ("switch", "ctw"):
            raise ValueError(f"mode must be 'switch' or 'ctw', got {mode!r}")
        if prior_scope not in ("all", "model-a"):
            raise ValueError(f"prior_scope must be 'all' or 'model-a', got {prior_scope!r}")
        if alphabet_size < 2:
            raise ValueError(f"alphabet size must be >= 2, got {alphabet_size}")
        if label_prior is not None:
            label_prior = tuple(float(p) for p in label_prior)
            if len(label_prior) != alphabet_size:
                raise ValueError("label_prior length must equal alphabet size")
            if any(p <= 0.0 for p in label_prior):
                raise ValueError("label_prior entries must be positive")
            if abs(sum(label_prior) - 1.0) > 1e-9:
                raise ValueError("label_prior must sum to 1")
        self.dimension = dimension
        self.alphabet_size = alphabet_size
        self.mode = mode
        self.label_prior = label_prior
        self.prior_scope = prior_scope
        self.rng = np.random.default_rng(seed)
        self.root = Node(alphabet_size)
        self.cumulative_logprob = 0.0
        self.n = 0
        self._pending = None
        self._axis_buf: list[int] = []
        self._axis_pos = 0
        self._depth_sum = 0
        self._depth_max = 0
        self._depth_hist: dict[int, int] = {}
        self._depth_count = 0

    def _draw_axis(self) -> int:
        # one value per split, taken from a buffered deterministic stream
        if self._axis_pos >= len(self._axis_buf):
            self._axis_buf = self.rng.integers(0, self.dimension, size=_AXIS_BUFFER).tolist()
            self._axis_pos = 0
        axis = self._axis_buf[self._axis_pos]
        self._axis_pos += 1
        return axis

    def _note_depth(self, depth: int) -> None:
        self._depth_sum += depth
        self._depth_count += 1
        if depth > self._depth_max:
            self._depth_max = depth
        self._depth_hist[depth] = self._depth_hist.get(depth, 0) + 1

    # Thin wrappers over the predictor operations, for ergonomic use.
    def process_features(self, point):
        from .predictor import process_features

        return process_features(self, point)

    def predict_distribution(self, point=None):
        from .predictor import predict_distribution

        return predict_distribution(self, point)

    def observe_label(self, path, label: int) -> float:
        from .predictor import observe_label

        return observe_label(self, path, label)

    def step(self, point, label: int):
        """process_features + predict + observe in one call.

        Returns (predictive vector, log probability emitted for label).
        """
        path = self.process_features(point)
        probs = self.predict_distribution()
        logp = self.observe_label(path, label)
        return probs, logp


def route(tree: KdSwitchTree, point) -> list[Node]:
    """Path of nodes from the root to the unique leaf containing point.

    Ties on the split coordinate go left.
    """
    if len(point) != tree.dimension:
        raise ValueError(
            f"point has dimension {len(point)}, tree expects {tree.dimension}"
        )
    node = tree.root
    path = [node]
    while node.axis is not None:
        node = node.left if point[node.axis] <= node.value else node.right
        path.append(node)
    return path


def split_leaf(tree: KdSwitchTree, leaf: Node, pivot_point) -> tuple[Node, Node]:
    """Split a leaf along a uniformly drawn axis, pivoting at the arriving point.

    Previously stored (labeled) samples migrate to the child containing them,
    in their original order; the pivot itself is stored, still unlabeled, in
    the child containing it.  The pivot must lie in the leaf's cell.
    """
    if not leaf.is_leaf:
        raise ValueError("split_leaf called on an internal node")
    axis = tree._draw_axis()
    value = float(pivot_point[axis])
    k = tree.alphabet_size
    left = Node(k)
    right = Node(k)
    for sample in leaf.stored:
        if sample.point[axis] <= value:
            left.stored.append(sample)
        else:
            right.stored.append(sample)
    leaf.split_index = leaf.counts.total + 1
    leaf.axis = axis
    leaf.value = value
    leaf.left = left
    leaf.right = right
    leaf.stored = None
    pivot = Sample(tuple(pivot_point), None)
    target = left if pivot.point[axis] <= value else right
    target.stored.append(pivot)
    return left, right
