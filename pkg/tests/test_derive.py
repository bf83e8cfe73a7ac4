"""Net derivation: structure preservation, traceability, determinism."""

from __future__ import annotations

import dataclasses
import json

import pytest

from qassess import DeriveError, UnknownIdError, parse_model, parse_plan
from qassess.bayes import NodeKind
from qassess.derive import derive_net, export_net, trace

MINIMAL_PLAN = {
    "rootActivity": "a.root",
    "metricNode": {
        "name": "defect-density",
        "range": [0.0, 1.0],
        "binCount": 10,
        "expr": {"scale": 1.0},
        "sigma": 0.1,
    },
}


def minimal_model(**overrides):
    doc = {
        "goal": "g", "question": "q", "metric": "m",
        "entities": [], "factors": [], "impacts": [], "measures": [],
        "activities": [{"id": "a.root", "name": "Root"}],
    }
    doc.update(overrides)
    return parse_model(json.dumps(doc))


class TestDeriveCaseStudy:
    def test_node_census(self, model, plan):
        net, _ = derive_net(model, plan)
        by_kind = {}
        for node in net.nodes.values():
            by_kind.setdefault(node.kind, []).append(node.id)
        assert len(by_kind[NodeKind.ACTIVITY]) == 9
        assert len(by_kind[NodeKind.FACTOR]) == 6
        assert sorted(by_kind[NodeKind.MEASURE]) == [
            "m.code-comments", "m.duplicate-session-id",
            "m.potential-csrf", "m.sql-injection",
        ]
        assert by_kind[NodeKind.METRIC] == ["vulnerability-density"]
        assert len(net.nodes) == 20

    def test_activity_edges_mirror_subtree(self, model, plan):
        net, _ = derive_net(model, plan)
        derived_edges = {
            (parent, node.id)
            for node in net.nodes.values() if node.kind is NodeKind.ACTIVITY
            for parent in node.parents
            if net.node(parent).kind is NodeKind.ACTIVITY
        }
        model_edges = {(a.id, a.parent) for a in model.activities
                       if a.parent is not None}
        assert derived_edges == model_edges

    def test_factor_edges_mirror_impacts(self, model, plan):
        net, _ = derive_net(model, plan)
        derived = {
            (parent, node.id)
            for node in net.nodes.values() if node.kind is NodeKind.ACTIVITY
            for parent in node.parents
            if net.node(parent).kind is NodeKind.FACTOR
        }
        assert derived == {(i.source, i.target) for i in model.impacts}

    def test_visibility_impacts_attack_directly(self, model, plan):
        net, _ = derive_net(model, plan)
        assert "f.visibility-of-public-code-comment" in net.node("a.attack").parents

    def test_every_scanner_measure_has_one_node(self, model, plan):
        net, _ = derive_net(model, plan)
        for measure in model.scanner_measures():
            node = net.node(measure.id)
            assert node.kind is NodeKind.MEASURE
            assert node.parents == (measure.target,)
            assert node.states == ("no", "yes")

    def test_metric_hangs_off_root_activity(self, model, plan):
        net, _ = derive_net(model, plan)
        metric = net.node("vulnerability-density")
        assert metric.parents == ("a.attack",)
        assert len(metric.states) == plan.metric.bin_count

    def test_derivation_is_deterministic(self, model, plan):
        first = export_net(*derive_net(model, plan))
        second = export_net(*derive_net(model, plan))
        assert first == second


class TestDeriveEdgeCases:
    def test_single_activity_no_factors(self):
        model = minimal_model()
        plan = parse_plan(json.dumps(MINIMAL_PLAN))
        net, _ = derive_net(model, plan)
        kinds = [node.kind for node in net.nodes.values()]
        assert sorted(k.value for k in kinds) == ["activity", "metric"]

    def test_missing_root_activity(self, model, plan):
        broken = dataclasses.replace(plan, root_activity="a.ghost")
        with pytest.raises(DeriveError, match="a.ghost"):
            derive_net(model, broken)

    def test_orphan_measure_is_an_error(self):
        model = minimal_model(
            entities=[{"id": "e1", "name": "E"}],
            factors=[{"id": "f.unwired", "entity": "e1", "property": "p",
                      "name": "Unwired"}],
            measures=[{"id": "m.orphan", "name": "Orphan", "target": "f.unwired",
                       "kind": "scanner-finding", "vulnClass": "c"}],
        )
        plan = parse_plan(json.dumps(MINIMAL_PLAN))
        with pytest.raises(DeriveError, match="orphan-measure"):
            derive_net(model, plan)

    def test_numeric_metric_measures_do_not_become_nodes(self):
        model = minimal_model(measures=[{
            "id": "m.size", "name": "Size metric", "target": "a.root",
            "kind": "numeric-metric",
        }])
        plan = parse_plan(json.dumps(MINIMAL_PLAN))
        net, _ = derive_net(model, plan)
        assert "m.size" not in net.nodes

    def test_factor_out_of_subtree_excluded(self, model, plan):
        # rooting at Injection keeps only the factors impacting it, and the
        # measures of excluded factors must be dropped from the model first
        sub = dataclasses.replace(
            model,
            activities=tuple(
                dataclasses.replace(a, parent=None) if a.id == "a.injection" else a
                for a in model.activities
                if a.id in {"a.injection", "a.script-injection", "a.sql-injection"}
            ),
            impacts=tuple(i for i in model.impacts
                          if i.target in {"a.injection", "a.script-injection",
                                          "a.sql-injection"}),
            measures=tuple(m for m in model.measures
                           if m.target == "f.sanitation-of-sql-statement"),
        )
        subplan = dataclasses.replace(plan, root_activity="a.injection")
        net, _ = derive_net(sub, subplan)
        factor_nodes = [n.id for n in net.nodes.values()
                        if n.kind is NodeKind.FACTOR]
        assert sorted(factor_nodes) == [
            "f.sanitation-of-dynamic-web-page", "f.sanitation-of-sql-statement",
        ]


class TestTrace:
    def test_round_trips(self, model, plan):
        net, node_map = derive_net(model, plan)
        node_id = trace(node_map, "f.sanitation-of-sql-statement")
        assert node_id in net.nodes
        assert trace(node_map, trace(node_map, node_id)) == node_id

    def test_metric_node_maps_to_plan_name(self, model, plan):
        _, node_map = derive_net(model, plan)
        assert trace(node_map, "vulnerability-density") == "vulnerability-density"

    def test_unknown_id(self, model, plan):
        _, node_map = derive_net(model, plan)
        with pytest.raises(UnknownIdError):
            trace(node_map, "nope")


class TestPlanParsing:
    def test_rejects_degenerate_range(self):
        doc = json.loads(json.dumps(MINIMAL_PLAN))
        doc["metricNode"]["range"] = [1.0, 1.0]
        with pytest.raises(DeriveError, match="range"):
            parse_plan(json.dumps(doc))

    def test_rejects_missing_expr_scale(self):
        doc = json.loads(json.dumps(MINIMAL_PLAN))
        doc["metricNode"]["expr"] = {"offset": 1.0}
        with pytest.raises(DeriveError, match="expr"):
            parse_plan(json.dumps(doc))

    def test_defaults_applied(self):
        plan = parse_plan(json.dumps(MINIMAL_PLAN))
        assert plan.defaults.ranked_state_count == 3
        assert plan.defaults.sigma_ranked == pytest.approx(0.2)
        assert plan.defaults.epsilon_measure == pytest.approx(0.1)

    def test_bad_epsilon(self):
        doc = json.loads(json.dumps(MINIMAL_PLAN))
        doc["defaults"] = {"epsilonMeasure": 0.9}
        with pytest.raises(DeriveError, match="epsilonMeasure"):
            parse_plan(json.dumps(doc))
