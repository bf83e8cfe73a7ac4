"""Mechanical derivation of a Bayesian net from a quality model.

Edge orientation: sub-activities and impacting factors are parents of
the activity they influence; measures are children of the factor (or
activity) they indicate; the metric node is a child of the root
activity. Observations on measures therefore update factors by Bayes
inversion, which propagates into activities and the metric.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from .bayes import BayesNet, Node, NodeKind, build_net
from .errors import DeriveError, UnknownIdError
from .nptgen import (
    AffineExpr,
    BinScale,
    Npt,
    RankedScale,
    WmeanSpec,
    arithmetic_npt,
    explicit_npt,
    partitioned_npt,
    ranked_npt,
)
from .qmodel import Activity, Factor, Polarity, QualityModel, activity_subtree


@dataclass(frozen=True)
class MetricSpec:
    name: str
    lo: float
    hi: float
    bin_count: int
    expr: AffineExpr
    sigma: float


@dataclass(frozen=True)
class PlanDefaults:
    ranked_state_count: int = 3
    sigma_ranked: float = 0.2
    epsilon_measure: float = 0.1


@dataclass(frozen=True)
class AssessmentPlan:
    root_activity: str
    metric: MetricSpec
    defaults: PlanDefaults = PlanDefaults()


@dataclass(frozen=True)
class NodeMap:
    """Bidirectional correspondence between model elements and net nodes."""

    node_to_element: Mapping[str, str]
    element_to_node: Mapping[str, str]

    def trace(self, some_id: str) -> str:
        if some_id in self.node_to_element:
            return self.node_to_element[some_id]
        if some_id in self.element_to_node:
            return self.element_to_node[some_id]
        raise UnknownIdError(f"id {some_id!r} is neither a node nor a model element")


def trace(node_map: NodeMap, some_id: str) -> str:
    """Map a net node id to its model element id or vice versa."""
    return node_map.trace(some_id)


# ---------------------------------------------------------------------------
# Plan parsing
# ---------------------------------------------------------------------------

def parse_plan(document: str) -> AssessmentPlan:
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise DeriveError(
            f"plan: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(doc, Mapping):
        raise DeriveError("plan: expected a JSON object")

    try:
        root = doc["rootActivity"]
        metric_raw = doc["metricNode"]
    except KeyError as exc:
        raise DeriveError(f"plan: missing required key {exc.args[0]!r}") from None
    if not isinstance(root, str) or not root:
        raise DeriveError("plan: rootActivity must be a non-empty string")
    if not isinstance(metric_raw, Mapping):
        raise DeriveError("plan: metricNode must be an object")

    try:
        name = metric_raw["name"]
        lo, hi = metric_raw["range"]
        bin_count = metric_raw["binCount"]
        expr_raw = metric_raw["expr"]
        sigma = metric_raw["sigma"]
    except (KeyError, TypeError, ValueError) as exc:
        raise DeriveError(f"plan: metricNode is incomplete ({exc})") from None
    if not isinstance(expr_raw, Mapping) or "scale" not in expr_raw:
        raise DeriveError("plan: metricNode.expr needs 'scale' (and optional 'offset')")
    if not (isinstance(lo, (int, float)) and isinstance(hi, (int, float)) and lo < hi):
        raise DeriveError(f"plan: metric range [{lo}, {hi}] is degenerate")
    if not (isinstance(bin_count, int) and bin_count >= 2):
        raise DeriveError(f"plan: metric binCount must be an integer >= 2, got {bin_count!r}")
    if not (isinstance(sigma, (int, float)) and sigma > 0):
        raise DeriveError(f"plan: metric sigma must be > 0, got {sigma!r}")

    metric = MetricSpec(
        name=str(name),
        lo=float(lo),
        hi=float(hi),
        bin_count=bin_count,
        expr=AffineExpr(float(expr_raw["scale"]), float(expr_raw.get("offset", 0.0))),
        sigma=float(sigma),
    )

    defaults_raw = doc.get("defaults", {})
    if not isinstance(defaults_raw, Mapping):
        raise DeriveError("plan: defaults must be an object")
    defaults = PlanDefaults(
        ranked_state_count=int(defaults_raw.get("rankedStateCount", 3)),
        sigma_ranked=float(defaults_raw.get("sigmaRanked", 0.2)),
        epsilon_measure=float(defaults_raw.get("epsilonMeasure", 0.1)),
    )
    if defaults.ranked_state_count < 2:
        raise DeriveError("plan: rankedStateCount must be >= 2")
    if defaults.sigma_ranked <= 0:
        raise DeriveError("plan: sigmaRanked must be > 0")
    if not (0.0 < defaults.epsilon_measure <= 0.5):
        raise DeriveError("plan: epsilonMeasure must lie in (0, 0.5]")

    return AssessmentPlan(root_activity=root, metric=metric, defaults=defaults)


def load_plan(path) -> AssessmentPlan:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_plan(handle.read())


# ---------------------------------------------------------------------------
# Derivation
# ---------------------------------------------------------------------------

def _factor_prior(factor: Factor, scale: RankedScale) -> Npt:
    if factor.npt is not None and factor.npt.type == "explicit":
        rows = factor.npt.rows or ()
        if len(rows) != 1 or len(rows[0]) != scale.state_count:
            raise DeriveError(
                f"factor {factor.id!r}: explicit prior must be one row of "
                f"{scale.state_count} probabilities"
            )
        return explicit_npt(rows, ())
    uniform = np.full((1, scale.state_count), 1.0 / scale.state_count)
    return Npt(scale.state_count, (), uniform)


def _activity_sigma(activity: Activity, defaults: PlanDefaults) -> float:
    if activity.npt is not None and activity.npt.type == "wmean" \
            and activity.npt.sigma is not None:
        return activity.npt.sigma
    return defaults.sigma_ranked


def derive_net(model: QualityModel, plan: AssessmentPlan) -> tuple[BayesNet, NodeMap]:
    """Build the assessment net per the four-step derivation.

    One ranked node per activity in the root's subtree and per factor
    impacting it, one yes/no measure node per scanner-finding measure on
    an included element, and one discretized metric node under the root.
    """
    try:
        subtree = activity_subtree(model, plan.root_activity)
    except UnknownIdError:
        raise DeriveError(
            f"root activity {plan.root_activity!r} not found in model"
        ) from None
    included_activities = set(subtree)

    scale = RankedScale.of(plan.defaults.ranked_state_count)

    included_factors: list[Factor] = []
    for factor in model.factors:
        if any(i.source == factor.id and i.target in included_activities
               for i in model.impacts):
            included_factors.append(factor)
    included_factor_ids = {f.id for f in included_factors}

    nodes: list[Node] = []
    node_to_element: dict[str, str] = {}

    def add(node: Node, element_id: str) -> None:
        if node.id in node_to_element:
            raise DeriveError(
                f"node id {node.id!r} is ambiguous; model element ids must be "
                "unique across collections to derive a net"
            )
        nodes.append(node)
        node_to_element[node.id] = element_id

    for factor in included_factors:
        add(Node(
            id=factor.id,
            kind=NodeKind.FACTOR,
            states=scale.labels,
            parents=(),
            npt=_factor_prior(factor, scale),
            scale=scale,
        ), factor.id)

    for activity_id in subtree:
        activity = model.activity(activity_id)
        child_ids = [a.id for a in model.activity_children(activity_id)
                     if a.id in included_activities]
        impacts = [i for i in model.impacts_on(activity_id)
                   if i.source in included_factor_ids]
        parents = tuple(child_ids) + tuple(i.source for i in impacts)
        weights = tuple([1.0] * len(child_ids)) + tuple(i.weight for i in impacts)
        polarities = tuple([Polarity.POSITIVE] * len(child_ids)) \
            + tuple(i.polarity for i in impacts)
        if activity.npt is not None and activity.npt.type == "explicit":
            npt = explicit_npt(activity.npt.rows or (),
                               tuple(scale.state_count for _ in parents))
        else:
            spec = WmeanSpec(weights, polarities,
                             sigma=_activity_sigma(activity, plan.defaults))
            npt = ranked_npt([scale] * len(parents), scale, spec)
        add(Node(
            id=activity_id,
            kind=NodeKind.ACTIVITY,
            states=scale.labels,
            parents=parents,
            npt=npt,
            scale=scale,
        ), activity_id)

    for measure in model.scanner_measures():
        target_included = (measure.target in included_factor_ids
                           or measure.target in included_activities)
        if not target_included:
            raise DeriveError(
                f"orphan-measure: {measure.id!r} targets {measure.target!r}, "
                "which has no impact path into the assessed activity subtree"
            )
        if measure.npt is not None and measure.npt.type == "explicit":
            npt = explicit_npt(measure.npt.rows or (), (scale.state_count,))
            if npt.child_states != 2 or npt.parent_state_counts != (scale.state_count,):
                raise DeriveError(
                    f"measure {measure.id!r}: explicit NPT must provide "
                    f"{scale.state_count} rows of (no, yes) probabilities"
                )
        else:
            epsilon = plan.defaults.epsilon_measure
            if measure.diagnosticity is not None:
                epsilon = measure.diagnosticity
            if measure.npt is not None and measure.npt.type == "partition" \
                    and measure.npt.epsilon is not None:
                epsilon = measure.npt.epsilon
            npt = partitioned_npt(scale, epsilon)
        add(Node(
            id=measure.id,
            kind=NodeKind.MEASURE,
            states=("no", "yes"),
            parents=(measure.target,),
            npt=npt,
        ), measure.id)

    metric_scale = BinScale(plan.metric.lo, plan.metric.hi, plan.metric.bin_count)
    add(Node(
        id=plan.metric.name,
        kind=NodeKind.METRIC,
        states=metric_scale.labels,
        parents=(plan.root_activity,),
        npt=arithmetic_npt(scale, (plan.metric.lo, plan.metric.hi),
                           plan.metric.bin_count, plan.metric.expr,
                           plan.metric.sigma),
        scale=metric_scale,
    ), plan.metric.name)

    net = build_net(nodes)
    element_to_node = {element: node for node, element in node_to_element.items()}
    return net, NodeMap(node_to_element, element_to_node)


# ---------------------------------------------------------------------------
# Net export
# ---------------------------------------------------------------------------

def export_net(net: BayesNet, node_map: NodeMap | None = None) -> dict[str, Any]:
    """JSON-ready dump of nodes, states, parents, and full NPT rows."""
    nodes = []
    for node in net.nodes.values():
        entry: dict[str, Any] = {
            "id": node.id,
            "kind": node.kind.value,
            "states": list(node.states),
            "parents": list(node.parents),
            "npt": [[float(p) for p in row] for row in node.npt.rows],
        }
        if node_map is not None:
            entry["element"] = node_map.trace(node.id)
        nodes.append(entry)
    return {"nodes": nodes}
