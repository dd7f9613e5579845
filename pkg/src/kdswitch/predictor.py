"""Chronological switching predictor over the online k-d tree.

Each cell mixes two experts: a memoryless add-half estimator on the cell's
own label subsequence (model a) and, once the cell has split, a recursion
into the child containing the current point (model b).  Per cell two weights
are kept such that, at all times, w_a + w_b equals the joint probability the
cell's distribution assigns to the labels observed in it so far.  The
conditional emitted for the next label is therefore

    (w_a * q_a + w_b * q_b) / (w_a + w_b)

where q_a is the cell's add-half predictive and q_b the child's conditional
(or q_a again while the cell is still a leaf).  After the label is revealed,
weights are refreshed; in "switch" mode the update after the cell's n-th
sample mixes the two hypotheses at rate 1/(n+1), in "ctw" mode the experts
are simply scaled by their own predictives.

Processing one sample is three calls: process_features (route + split),
predict_distribution, observe_label.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

from .kt import check_symbol, kt_block_logprob
from .tree import KdSwitchTree, Node, LOG_HALF, route, split_leaf


def log_add(a: float, b: float) -> float:
    """Stable log(exp(a) + exp(b)) for finite floats."""
    if a < b:
        a, b = b, a
    return a + math.log1p(math.exp(b - a))


class RoutePath:
    """Root-to-leaf node path for one sample, with the predictive cache.

    Behaves as a sequence of nodes.  ``conds[i]`` caches node i's conditional
    vector and ``q_as[i]`` its model-a predictive vector; both are filled by
    the prediction pass and reused by the update pass.
    """

    __slots__ = ("nodes", "pivot_sample", "conds", "q_as")

    def __init__(self, nodes, pivot_sample):
        self.nodes = nodes
        self.pivot_sample = pivot_sample
        self.conds = None
        self.q_as = None

    def __len__(self):
        return len(self.nodes)

    def __getitem__(self, i):
        return self.nodes[i]

    def __iter__(self):
        return iter(self.nodes)


def init_child_weights(child: Node, moved_labels: Sequence[int]) -> None:
    """Initialize a freshly created child from the labels migrated into it.

    Both weights start at half the block probability of the migrated labels,
    reproducing the state the cell would have reached had it existed from the
    beginning of the stream.
    """
    k = child.counts.alphabet_size
    counts = child.counts
    logprob = 0.0
    denom_base = 0.5 * k
    for s in moved_labels:
        check_symbol(s, k)
        logprob += math.log((counts.counts[s] + 0.5) / (counts.total + denom_base))
        counts.add(s)
    child.log_wa = LOG_HALF + logprob
    child.log_wb = LOG_HALF + logprob


def process_features(tree: KdSwitchTree, point) -> RoutePath:
    """Route the arriving point to a leaf, split it there, return the new path.

    The returned path ends at the child that contains the point; the point's
    label must be supplied next via observe_label.
    """
    if tree._pending is not None:
        raise ValueError("previous sample is still awaiting its label")
    nodes = route(tree, point)
    leaf = nodes[-1]
    tree._note_depth(len(nodes) - 1)
    left, right = split_leaf(tree, leaf, point)
    init_child_weights(left, [s.label for s in left.stored if s.label is not None])
    init_child_weights(right, [s.label for s in right.stored if s.label is not None])
    terminal = left if point[leaf.axis] <= leaf.value else right
    nodes.append(terminal)
    path = RoutePath(nodes, terminal.stored[-1])
    tree._pending = path
    return path


def _weight_fraction(node: Node) -> float:
    """w_a / (w_a + w_b), computed from the log weights."""
    d = node.log_wb - node.log_wa
    if d > 700.0:
        return 0.0
    if d < -700.0:
        return 1.0
    return 1.0 / (1.0 + math.exp(d))


def _kt_vector(counts) -> list[float]:
    denom = counts.total + 0.5 * counts.alphabet_size
    return [(c + 0.5) / denom for c in counts.counts]


def _cond_vectors(tree: KdSwitchTree, nodes) -> tuple[list, list]:
    """Conditional and model-a predictive vectors for every node on a path.

    Built bottom-up: the terminal leaf's conditional is its own predictive
    (both experts coincide there); each node above mixes its model-a
    predictive with the child's conditional at the posterior weight fraction.
    """
    k = tree.alphabet_size
    prior = tree.label_prior
    root = tree.root
    count = len(nodes)
    conds: list = [None] * count
    q_as: list = [None] * count

    leaf = nodes[-1]
    if leaf is root and prior is not None:
        q_a = list(prior)
        if tree.prior_scope == "all":
            cond = list(prior)
        else:
            kt_vec = _kt_vector(leaf.counts)
            ua = _weight_fraction(leaf)
            ub = 1.0 - ua
            cond = [ua * q_a[j] + ub * kt_vec[j] for j in range(k)]
        conds[-1] = cond
        q_as[-1] = q_a
    else:
        vec = _kt_vector(leaf.counts)
        conds[-1] = vec
        q_as[-1] = vec

    for i in range(count - 2, -1, -1):
        node = nodes[i]
        child_cond = conds[i + 1]
        if node is root and prior is not None:
            q_a = list(prior)
        else:
            q_a = _kt_vector(node.counts)
        ua = _weight_fraction(node)
        ub = 1.0 - ua
        conds[i] = [ua * q_a[j] + ub * child_cond[j] for j in range(k)]
        q_as[i] = q_a
    return conds, q_as


def predict_distribution(tree: KdSwitchTree, point=None) -> list[float]:
    """Predictive probabilities for the next label at the pending point.

    If a sample is pending (process_features ran), its path is used and the
    per-node vectors are cached for the update pass.  Otherwise the given
    point is routed read-only, which matches the feed protocol only while
    the tree is empty.
    """
    path = tree._pending
    if path is not None:
        if path.conds is None:
            path.conds, path.q_as = _cond_vectors(tree, path.nodes)
        return list(path.conds[0])
    if point is None:
        raise ValueError("no pending sample and no point given")
    nodes = route(tree, point)
    conds, _ = _cond_vectors(tree, nodes)
    return conds, _ if False else conds[0]


def node_predictive(tree: KdSwitchTree, nodes, symbol: int) -> float:
    """Conditional probability of `symbol` at the top node of the given path."""
    check_symbol(symbol, tree.alphabet_size)
    conds, _ = _cond_vectors(tree, list(nodes))
    return conds[0][symbol]


def observe_label(tree: KdSwitchTree, path: RoutePath, label: int) -> float:
    """Commit the pending sample's label; returns the log probability emitted.

    Weight refresh runs bottom-up along the path.  The terminal leaf scales
    both weights by its predictive; every internal node forms its new joint
    S = w_a q_a + w_b q_b and then either keeps the expert split (ctw) or
    redistributes a 1/(n+1) fraction of S to each expert (switch), n being
    the node's subsequence length including the current sample.
    """
    if tree._pending is not path or path is None:
        raise ValueError("path does not match the pending sample (label already observed?)")
    check_symbol(label, tree.alphabet_size)
    if path.conds is None:
        path.conds, path.q_as = _cond_vectors(tree, path.nodes)
    nodes = path.nodes
    conds = path.conds
    q_as = path.q_as
    root = nodes[0]
    old_root_sum = log_add(root.log_wa, root.log_wb)
    ctw = tree.mode == "ctw"
    last = len(nodes) - 1
    log_s_root = 0.0
    for i in range(last, -1, -1):
        node = nodes[i]
        if i == last:
            lq = math.log(conds[i][label])
            node.log_wa += lq
            node.log_wb += lq
        else:
            la = node.log_wa + math.log(q_as[i][label])
            lb = node.log_wb + math.log(conds[i + 1][label])
            if ctw:
                if i == 0:
                    log_s_root = log_add(la, lb)
                node.log_wa = la
                node.log_wb = lb
            else:
                ls = log_add(la, lb)
                if i == 0:
                    log_s_root = ls
                n_incl = node.counts.total + 1
                alpha = 1.0 / (n_incl + 1)
                mixed = math.log(alpha) + ls
                if n_incl == 1:
                    node.log_wa = mixed
                    node.log_wb = mixed
                else:
                    log_beta = math.log1p(-2.0 * alpha)
                    node.log_wa = log_add(mixed, log_beta + la)
                    node.log_wb = log_add(mixed, log_beta + lb)
        node.counts.add(label)
    emitted = log_s_root - old_root_sum
    tree.cumulative_logprob += emitted
    tree.n += 1
    path.pivot_sample.label = label
    tree._pending = None
    return emitted
