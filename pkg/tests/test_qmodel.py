"""Quality-model parsing, validation, serialization, and hierarchy walks."""

from __future__ import annotations

import json

import pytest

from qassess import (
    ModelIntegrityError,
    ModelSyntaxError,
    UnknownIdError,
    activity_subtree,
    parse_model,
    serialize_model,
    validate_model,
)
from conftest import DOCS, FIXTURES

CASE_STUDY_ACTIVITIES = [
    "Attack",
    "Probabilistic Techniques",
    "Injection",
    "Exploitation of Trusted Credentials",
    "Password Brute Forcing",
    "Script Injection",
    "SQL Injection",
    "Cross Site Request Forgery",
    "Session Credential Falsification Through Prediction",
]

CASE_STUDY_FACTORS = [
    "Completeness of Password Change",
    "Sanitation of Dynamic Web Page",
    "Sanitation of SQL Statement",
    "Visibility of Public Code Comment",
    "Authenticity of Request",
    "Uniqueness of Session ID",
]

MINIMAL = {
    "goal": "g", "question": "q", "metric": "m",
    "entities": [], "factors": [], "impacts": [], "measures": [],
    "activities": [{"id": "a.root", "name": "Root"}],
}


def make_doc(**overrides):
    doc = json.loads(json.dumps(MINIMAL))
    doc.update(overrides)
    return doc


class TestParseModel:
    def test_case_study_fixture(self, model):
        assert [a.name for a in model.activities] == CASE_STUDY_ACTIVITIES
        assert [f.name for f in model.factors] == CASE_STUDY_FACTORS
        assert len(model.measures) == 4
        assert model.question == ("How many vulnerabilities are there in "
                                  "relation to the software size?")

    def test_empty_collections_rejected(self):
        doc = make_doc(activities=[])
        with pytest.raises(ModelIntegrityError) as exc:
            parse_model(json.dumps(doc))
        assert any(i.code == "no-activities" for i in exc.value.issues)

    def test_impact_to_unknown_activity(self):
        doc = make_doc(
            entities=[{"id": "e1", "name": "E"}],
            factors=[{"id": "f1", "entity": "e1", "property": "p", "name": "F"}],
            impacts=[{"id": "i1", "source": "f1", "target": "a.ghost",
                      "polarity": "-"}],
        )
        with pytest.raises(ModelIntegrityError) as exc:
            parse_model(json.dumps(doc))
        assert "a.ghost" in str(exc.value)

    def test_syntax_error_reports_position(self):
        with pytest.raises(ModelSyntaxError, match=r"line \d+"):
            parse_model('{"goal": "g",\n  "question": oops}')

    def test_missing_key_names_path(self):
        doc = make_doc()
        del doc["activities"][0]["name"]
        with pytest.raises(ModelSyntaxError, match=r"activities\[0\]"):
            parse_model(json.dumps(doc))

    def test_fixture_conforms_to_shipped_schema(self):
        jsonschema = pytest.importorskip("jsonschema")
        schema = json.loads((DOCS / "model-schema.json").read_text())
        document = json.loads((FIXTURES / "casestudy.qm.json").read_text())
        jsonschema.validate(document, schema)


class TestValidateModel:
    def test_case_study_is_valid(self, model):
        assert validate_model(model) == []

    def test_duplicate_factor_pair(self):
        doc = make_doc(
            entities=[{"id": "e1", "name": "E"}],
            factors=[
                {"id": "f1", "entity": "e1", "property": "p", "name": "F1"},
                {"id": "f2", "entity": "e1", "property": "p", "name": "F2"},
            ],
        )
        with pytest.raises(ModelIntegrityError) as exc:
            parse_model(json.dumps(doc))
        assert any(i.code == "duplicate-factor" for i in exc.value.issues)

    def test_activity_cycle_names_path(self):
        doc = make_doc(activities=[
            {"id": "a.a", "name": "A", "parent": "a.b"},
            {"id": "a.b", "name": "B", "parent": "a.a"},
        ])
        with pytest.raises(ModelIntegrityError) as exc:
            parse_model(json.dumps(doc))
        cycle_issues = [i for i in exc.value.issues if i.code == "cycle"]
        assert cycle_issues
        assert "a.a" in cycle_issues[0].message and "a.b" in cycle_issues[0].message

    def test_bad_weight(self):
        doc = make_doc(
            entities=[{"id": "e1", "name": "E"}],
            factors=[{"id": "f1", "entity": "e1", "property": "p", "name": "F"}],
            impacts=[{"id": "i1", "source": "f1", "target": "a.root",
                      "polarity": "-", "weight": -2}],
        )
        with pytest.raises(ModelIntegrityError) as exc:
            parse_model(json.dumps(doc))
        assert any(i.code == "bad-weight" for i in exc.value.issues)

    def test_scanner_measure_requires_class(self):
        doc = make_doc(measures=[{
            "id": "m1", "name": "M", "target": "a.root",
            "kind": "scanner-finding",
        }])
        with pytest.raises(ModelIntegrityError) as exc:
            parse_model(json.dumps(doc))
        assert any(i.code == "missing-vuln-class" for i in exc.value.issues)

    def test_two_activity_roots_rejected(self):
        doc = make_doc(activities=[
            {"id": "a.one", "name": "One"},
            {"id": "a.two", "name": "Two"},
        ])
        with pytest.raises(ModelIntegrityError) as exc:
            parse_model(json.dumps(doc))
        assert any(i.code == "multiple-activity-roots" for i in exc.value.issues)


class TestSerializeModel:
    def test_case_study_round_trip(self, model):
        assert parse_model(serialize_model(model)) == model

    def test_minimal_round_trip(self):
        model = parse_model(json.dumps(MINIMAL))
        assert parse_model(serialize_model(model)) == model

    def test_unicode_names_preserved(self):
        doc = make_doc(activities=[{"id": "a.root", "name": "Überprüfung — 攻撃"}])
        model = parse_model(json.dumps(doc))
        again = parse_model(serialize_model(model))
        assert again.activities[0].name == "Überprüfung — 攻撃"
        assert again == model


class TestActivitySubtree:
    def test_attack_subtree_is_whole_tree(self, model):
        order = activity_subtree(model, "a.attack")
        assert len(order) == 9
        assert order[0] == "a.attack"
        assert set(order) == {a.id for a in model.activities}

    def test_leaf_subtree(self, model):
        assert activity_subtree(model, "a.sql-injection") == ["a.sql-injection"]

    def test_injection_subtree(self, model):
        assert activity_subtree(model, "a.injection") == [
            "a.injection", "a.script-injection", "a.sql-injection",
        ]

    def test_unknown_root(self, model):
        with pytest.raises(UnknownIdError):
            activity_subtree(model, "a.nope")

    def test_each_descendant_exactly_once(self, model):
        # set equality against the transitive closure of parent links
        for root in (a.id for a in model.activities):
            order = activity_subtree(model, root)
            assert len(order) == len(set(order))
            closure = {
                a.id for a in model.activities
                if _is_descendant_or_self(model, a.id, root)
            }
            assert set(order) == closure


def _is_descendant_or_self(model, node_id: str, root: str) -> bool:
    current = node_id
    while current is not None:
        if current == root:
            return True
        current = model.activity(current).parent
    return False
