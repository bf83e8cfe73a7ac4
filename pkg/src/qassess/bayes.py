"""Discrete Bayesian network with exact inference.

`query_marginal` runs variable elimination (min-weight ordering, barren
nodes pruned); `joint_enumerate` materializes the full joint distribution
and serves as the independent test oracle for the same contract. Both
raise `InconsistentEvidenceError` instead of returning a zero vector when
evidence has no probability mass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence, Union

import numpy as np

from .errors import (
    InconsistentEvidenceError,
    NetError,
    StateSpaceError,
    UnknownIdError,
)
from .nptgen import BinScale, Npt, RankedScale

Scale = Union[RankedScale, BinScale]

ENUMERATION_GUARD = 10_000_000


class NodeKind(str, Enum):
    ACTIVITY = "activity"
    FACTOR = "factor"
    MEASURE = "measure"
    METRIC = "metric"


@dataclass(frozen=True)
class Node:
    id: str
    kind: NodeKind
    states: tuple[str, ...]
    parents: tuple[str, ...]
    npt: Npt
    scale: Scale | None = None

    def state_index(self, label: str) -> int:
        try:
            return self.states.index(label)
        except ValueError:
            raise UnknownIdError(
                f"node {self.id!r} has no state {label!r} "
                f"(states: {', '.join(self.states)})"
            ) from None


@dataclass(frozen=True)
class Posterior:
    """Normalized marginal over one node's states.

    `mean`/`sd` are present when the node carries a ranked or numeric
    scale and are computed over the scale midpoints.
    """

    node: str
    probabilities: np.ndarray
    mean: float | None = None
    sd: float | None = None


class BayesNet:
    """Immutable DAG of nodes; build via `build_net`."""

    def __init__(self, nodes: Sequence[Node], order: Sequence[str]):
        self.nodes: dict[str, Node] = {n.id: n for n in nodes}
        self.topological_order: tuple[str, ...] = tuple(order)

    def node(self, node_id: str) -> Node:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise UnknownIdError(f"unknown net node id: {node_id!r}") from None

    def children_of(self, node_id: str) -> list[str]:
        return [n.id for n in self.nodes.values() if node_id in n.parents]

    def state_space(self) -> int:
        size = 1
        for node in self.nodes.values():
            size *= len(node.states)
        return size


def build_net(nodes: Sequence[Node]) -> BayesNet:
    """Validate node set (acyclic, resolvable parents, NPT dims) and
    cache a topological order."""
    by_id: dict[str, Node] = {}
    for node in nodes:
        if node.id in by_id:
            raise NetError(f"duplicate node id {node.id!r}")
        by_id[node.id] = node

    for node in by_id.values():
        for parent in node.parents:
            if parent not in by_id:
                raise NetError(
                    f"node {node.id!r} references unknown parent {parent!r}"
                )
        expected_counts = tuple(len(by_id[p].states) for p in node.parents)
        if node.npt.parent_state_counts != expected_counts:
            raise NetError(
                f"node {node.id!r}: NPT expects parent state counts "
                f"{node.npt.parent_state_counts}, parents have {expected_counts}"
            )
        if node.npt.child_states != len(node.states):
            raise NetError(
                f"node {node.id!r}: NPT has {node.npt.child_states} columns "
                f"but the node has {len(node.states)} states"
            )

    order: list[str] = []
    state: dict[str, int] = {}  # 1 = on stack, 2 = done

    def visit(node_id: str, stack: list[str]) -> None:
        mark = state.get(node_id)
        if mark == 2:
            return
        if mark == 1:
            cycle = stack[stack.index(node_id):] + [node_id]
            raise NetError("cycle detected: " + " -> ".join(cycle))
        state[node_id] = 1
        stack.append(node_id)
        for parent in by_id[node_id].parents:
            visit(parent, stack)
        stack.pop()
        state[node_id] = 2
        order.append(node_id)

    for node_id in by_id:
        visit(node_id, [])

    return BayesNet(list(by_id.values()), order)


# ---------------------------------------------------------------------------
# Evidence handling
# ---------------------------------------------------------------------------

def _check_evidence(net: BayesNet, evidence: Mapping[str, int]) -> dict[str, int]:
    checked: dict[str, int] = {}
    for node_id, state in evidence.items():
        node = net.node(node_id)
        if not isinstance(state, (int, np.integer)) or not 0 <= state < len(node.states):
            raise NetError(
                f"evidence state {state!r} out of range for node {node_id!r} "
                f"({len(node.states)} states)"
            )
        checked[node_id] = int(state)
    return checked


def _point_mass(node: Node, state: int) -> np.ndarray:
    probs = np.zeros(len(node.states))
    probs[state] = 1.0
    return probs


def _relevant_ids(net: BayesNet, targets: set[str]) -> set[str]:
    """Ancestral closure of `targets`; everything else is barren for the
    query and sums out to one."""
    keep: set[str] = set()
    stack = list(targets)
    while stack:
        node_id = stack.pop()
        if node_id in keep:
            continue
        keep.add(node_id)
        stack.extend(net.node(node_id).parents)
    return keep


# ---------------------------------------------------------------------------
# Variable elimination
# ---------------------------------------------------------------------------

class _Factor:
    __slots__ = ("vars", "values")

    def __init__(self, variables: tuple[str, ...], values: np.ndarray):
        self.vars = variables
        self.values = values


def _node_factor(net: BayesNet, node: Node) -> _Factor:
    shape = tuple(len(net.node(p).states) for p in node.parents) + (len(node.states),)
    values = node.npt.rows.reshape(shape)
    return _Factor(node.parents + (node.id,), values)


def _restrict(factor: _Factor, evidence: Mapping[str, int]) -> _Factor:
    if not any(v in evidence for v in factor.vars):
        return factor
    index = tuple(evidence.get(v, slice(None)) for v in factor.vars)
    remaining = tuple(v for v in factor.vars if v not in evidence)
    return _Factor(remaining, factor.values[index])


def _multiply(left: _Factor, right: _Factor) -> _Factor:
    union = left.vars + tuple(v for v in right.vars if v not in left.vars)
    axis = {v: i for i, v in enumerate(union)}

    def aligned(factor: _Factor) -> np.ndarray:
        order = sorted(range(len(factor.vars)), key=lambda i: axis[factor.vars[i]])
        values = np.transpose(factor.values, order)
        shape = [1] * len(union)
        for var in factor.vars:
            shape[axis[var]] = factor.values.shape[factor.vars.index(var)]
        return values.reshape(shape)

    return _Factor(union, aligned(left) * aligned(right))


def _sum_out(factor: _Factor, var: str) -> _Factor:
    idx = factor.vars.index(var)
    remaining = factor.vars[:idx] + factor.vars[idx + 1:]
    return _Factor(remaining, factor.values.sum(axis=idx))


def _elimination_order(variables: set[str], factors: list[_Factor],
                       domain: Mapping[str, int]) -> list[str]:
    """Greedy min-weight ordering with lexicographic tie-breaking."""
    adjacency: dict[str, set[str]] = {v: set() for v in variables}
    for factor in factors:
        scoped = [v for v in factor.vars if v in variables]
        for v in scoped:
            adjacency[v].update(u for u in scoped if u != v)

    order: list[str] = []
    remaining = set(variables)
    while remaining:
        def cost(v: str) -> tuple[float, str]:
            weight = 1.0
            for u in adjacency[v]:
                if u in remaining:
                    weight *= domain[u]
            return (weight, v)

        chosen = min(remaining, key=cost)
        order.append(chosen)
        remaining.discard(chosen)
        neighbours = {u for u in adjacency[chosen] if u in remaining}
        for u in neighbours:
            adjacency[u].update(n for n in neighbours if n != u)
            adjacency[u].discard(chosen)
    return order


def query_marginal(net: BayesNet, evidence: Mapping[str, int],
                   target: str) -> Posterior:
    """Exact posterior P(target | evidence) by variable elimination."""
    target_node = net.node(target)
    observed = _check_evidence(net, evidence)

    keep = _relevant_ids(net, {target} | set(observed))
    factors = [
        _restrict(_node_factor(net, net.node(node_id)), observed)
        for node_id in net.topological_order
        if node_id in keep
    ]
    domain = {node_id: len(net.node(node_id).states) for node_id in keep}
    hidden = {v for v in keep if v not in observed and v != target}

    for var in _elimination_order(hidden, factors, domain):
        related = [f for f in factors if var in f.vars]
        if not related:
            continue
        product = related[0]
        for factor in related[1:]:
            product = _multiply(product, factor)
        factors = [f for f in factors if var not in f.vars]
        factors.append(_sum_out(product, var))

    result = _Factor((), np.asarray(1.0))
    for factor in factors:
        result = _multiply(result, factor)

    if target in observed:
        total = float(result.values.sum())
        if total <= 0.0:
            raise InconsistentEvidenceError(
                f"evidence has zero probability (querying {target!r})"
            )
        probs = _point_mass(target_node, observed[target])
    else:
        if result.vars != (target,):
            raise NetError(f"elimination left unexpected scope {result.vars!r}")
        values = result.values
        total = float(values.sum())
        if total <= 0.0:
            raise InconsistentEvidenceError(
                f"evidence has zero probability (querying {target!r})"
            )
        probs = values if total == 1.0 else values / total

    return make_posterior(target_node, probs)


# ---------------------------------------------------------------------------
# Enumeration oracle
# ---------------------------------------------------------------------------

def joint_enumerate(net: BayesNet, evidence: Mapping[str, int],
                    target: str) -> Posterior:
    """Posterior by materializing the evidence-instantiated full joint.

    Same contract as `query_marginal`; guarded to nets whose unobserved
    joint state space stays within `ENUMERATION_GUARD` cells.
    """
    target_node = net.node(target)
    observed = _check_evidence(net, evidence)

    hidden = [n for n in net.nodes if n not in observed]
    space = 1
    for node_id in hidden:
        space *= len(net.node(node_id).states)
    if space > ENUMERATION_GUARD:
        raise StateSpaceError(
            f"joint state space {space} exceeds enumeration guard "
            f"{ENUMERATION_GUARD}"
        )

    axis = {node_id: i for i, node_id in enumerate(hidden)}
    shape = tuple(len(net.node(node_id).states) for node_id in hidden)
    joint = np.ones(shape)
    for node in net.nodes.values():
        cpt = node.npt.rows.reshape(
            tuple(len(net.nodes[p].states) for p in node.parents)
            + (len(node.states),)
        )
        scope = node.parents + (node.id,)
        cpt = cpt[tuple(observed.get(v, slice(None)) for v in scope)]
        free = [v for v in scope if v not in observed]
        expanded_shape = [1] * len(hidden)
        order = sorted(range(len(free)), key=lambda i: axis[free[i]])
        cpt = np.transpose(cpt, order)
        for var in free:
            expanded_shape[axis[var]] = len(net.nodes[var].states)
        joint = joint * cpt.reshape(expanded_shape)

    total = float(joint.sum())
    if total <= 0.0:
        raise InconsistentEvidenceError(
            f"evidence has zero probability (querying {target!r})"
        )
    if target in observed:
        probs = _point_mass(target_node, observed[target])
    else:
        other_axes = tuple(i for v, i in axis.items() if v != target)
        marginal = joint.sum(axis=other_axes)
        probs = marginal / total
    return make_posterior(target_node, probs)


# ---------------------------------------------------------------------------
# Posterior statistics
# ---------------------------------------------------------------------------

def posterior_stats(probabilities: np.ndarray,
                    scale: Scale) -> tuple[float, float]:
    """Mean and standard deviation over the scale's state midpoints."""
    if scale is None:
        raise NetError("node has no ranked or numeric scale")
    mids = np.asarray(scale.midpoints)
    probs = np.asarray(probabilities, dtype=float)
    if mids.shape != probs.shape:
        raise NetError(
            f"{probs.shape[0]} probabilities vs {mids.shape[0]} scale states"
        )
    mean = float(np.dot(probs, mids))
    variance = float(np.dot(probs, mids ** 2)) - mean * mean
    return mean, math.sqrt(max(variance, 0.0))


def make_posterior(node: Node, probabilities: np.ndarray) -> Posterior:
    probs = np.asarray(probabilities, dtype=float)
    probs.flags.writeable = False
    if node.scale is not None:
        mean, sd = posterior_stats(probs, node.scale)
        return Posterior(node.id, probs, mean, sd)
    return Posterior(node.id, probs)
