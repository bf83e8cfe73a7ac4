"""Test-only oracles and random-input generators.

These deliberately avoid the library's own code paths: the Simpson
integrator checks the closed-form truncated-Normal CDF, and the random
net generator feeds the mutual query/enumeration consistency checks.
"""

from __future__ import annotations

import math

import numpy as np

from qassess.bayes import Node, NodeKind, build_net
from qassess.nptgen import Npt


def simpson_tnormal_cdf(x: float, mu: float, sigma: float,
                        panels: int = 10_000) -> float:
    """Truncated-Normal CDF on [0, 1] by compound Simpson integration."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0

    def density(t: float) -> float:
        z = (t - mu) / sigma
        return math.exp(-0.5 * z * z)

    def integrate(lo: float, hi: float) -> float:
        if hi <= lo:
            return 0.0
        n = panels if panels % 2 == 0 else panels + 1
        h = (hi - lo) / n
        total = density(lo) + density(hi)
        for i in range(1, n):
            total += density(lo + i * h) * (4 if i % 2 == 1 else 2)
        return total * h / 3.0

    return integrate(0.0, x) / integrate(0.0, 1.0)


def random_net(rng: np.random.Generator, max_nodes: int = 8,
               max_states: int = 3, max_parents: int = 3):
    """Random small DAG with Dirichlet NPT rows and random evidence."""
    n_nodes = int(rng.integers(1, max_nodes + 1))
    nodes = []
    ids = [f"n{i}" for i in range(n_nodes)]
    state_counts = [int(rng.integers(2, max_states + 1)) for _ in range(n_nodes)]
    for i, node_id in enumerate(ids):
        pool = ids[:i]
        k = int(rng.integers(0, min(len(pool), max_parents) + 1))
        parents = tuple(sorted(rng.choice(pool, size=k, replace=False))) if k else ()
        parent_counts = tuple(state_counts[ids.index(p)] for p in parents)
        combos = int(np.prod(parent_counts)) if parent_counts else 1
        rows = rng.dirichlet(np.ones(state_counts[i]), size=combos)
        nodes.append(Node(
            id=node_id,
            kind=NodeKind.FACTOR,
            states=tuple(f"s{j}" for j in range(state_counts[i])),
            parents=parents,
            npt=Npt(state_counts[i], parent_counts, rows),
        ))
    net = build_net(nodes)

    evidence = {}
    for i, node_id in enumerate(ids):
        if rng.random() < 0.3:
            evidence[node_id] = int(rng.integers(0, state_counts[i]))
    return net, evidence
