"""Activity-based quality model: types, parsing, validation, serialization.

A quality model couples two hierarchies (entities and attack activities)
through factors (entity x property), signed impacts of factors on
activities, and measures that indicate factor levels. Models are
immutable after construction; all mutation happens on plain dicts before
`QualityModel` is built.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Mapping

from .errors import ModelIntegrityError, ModelSyntaxError, UnknownIdError


class Polarity(str, Enum):
    POSITIVE = "+"
    NEGATIVE = "-"


class MeasureKind(str, Enum):
    SCANNER_FINDING = "scanner-finding"
    NUMERIC_METRIC = "numeric-metric"


NPT_DIRECTIVE_TYPES = ("wmean", "partition", "arithmetic", "explicit")


@dataclass(frozen=True)
class NptDirective:
    """Per-element NPT override carried in the model file.

    `wmean` tunes the spread of a weighted-mean activity node, `partition`
    the uncertainty band of a measure node, `explicit` supplies literal
    rows (a single row acts as a root prior).
    """

    type: str
    sigma: float | None = None
    epsilon: float | None = None
    rows: tuple[tuple[float, ...], ...] | None = None


@dataclass(frozen=True)
class Entity:
    id: str
    name: str
    parent: str | None = None


@dataclass(frozen=True)
class Activity:
    id: str
    name: str
    parent: str | None = None
    npt: NptDirective | None = None


@dataclass(frozen=True)
class Factor:
    id: str
    entity: str
    property: str
    name: str
    npt: NptDirective | None = None


@dataclass(frozen=True)
class Impact:
    id: str
    source: str  # factor id
    target: str  # activity id
    polarity: Polarity
    weight: float = 1.0


@dataclass(frozen=True)
class Measure:
    id: str
    name: str
    target: str  # factor or activity id
    kind: MeasureKind
    vuln_class: str | None = None
    diagnosticity: float | None = None
    npt: NptDirective | None = None


@dataclass(frozen=True)
class QualityModel:
    """Immutable quality model plus its GQM framing."""

    goal: str
    question: str
    metric: str
    entities: tuple[Entity, ...]
    activities: tuple[Activity, ...]
    factors: tuple[Factor, ...]
    impacts: tuple[Impact, ...]
    measures: tuple[Measure, ...]
    _index: dict[str, Any] = field(
        default_factory=dict, compare=False, repr=False, hash=False
    )

    def __post_init__(self) -> None:
        index: dict[str, Any] = {}
        for group in (self.entities, self.activities, self.factors,
                      self.impacts, self.measures):
            for elem in group:
                index.setdefault(elem.id, elem)
        object.__setattr__(self, "_index", index)

    def element(self, elem_id: str) -> Any:
        try:
            return self._index[elem_id]
        except KeyError:
            raise UnknownIdError(f"unknown model element id: {elem_id!r}") from None

    def activity(self, activity_id: str) -> Activity:
        elem = self._index.get(activity_id)
        if not isinstance(elem, Activity):
            raise UnknownIdError(f"unknown activity id: {activity_id!r}")
        return elem

    def activity_children(self, activity_id: str) -> list[Activity]:
        """Child activities of `activity_id` in document order."""
        return [a for a in self.activities if a.parent == activity_id]

    def impacts_on(self, activity_id: str) -> list[Impact]:
        return [i for i in self.impacts if i.target == activity_id]

    def measures_on(self, target_id: str) -> list[Measure]:
        return [m for m in self.measures if m.target == target_id]

    def scanner_measures(self) -> list[Measure]:
        return [m for m in self.measures if m.kind is MeasureKind.SCANNER_FINDING]


@dataclass(frozen=True)
class ValidationIssue:
    """One invariant violation; `code` is stable and machine-readable."""

    code: str
    message: str
    element: str | None = None

    def __str__(self) -> str:
        where = f" [{self.element}]" if self.element else ""
        return f"{self.code}: {self.message}{where}"


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def _require(obj: Mapping[str, Any], key: str, path: str) -> Any:
    if key not in obj:
        raise ModelSyntaxError(f"{path}: missing required key {key!r}")
    return obj[key]


def _text(value: Any, path: str) -> str:
    if not isinstance(value, str):
        raise ModelSyntaxError(f"{path}: expected string, got {type(value).__name__}")
    return value


def _opt_text(obj: Mapping[str, Any], key: str, path: str) -> str | None:
    value = obj.get(key)
    if value is None:
        return None
    return _text(value, f"{path}.{key}")


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ModelSyntaxError(f"{path}: expected number, got {type(value).__name__}")
    return float(value)


def _obj_list(doc: Mapping[str, Any], key: str) -> list[Mapping[str, Any]]:
    raw = _require(doc, key, "document")
    if not isinstance(raw, list):
        raise ModelSyntaxError(f"{key}: expected array")
    for i, item in enumerate(raw):
        if not isinstance(item, Mapping):
            raise ModelSyntaxError(f"{key}[{i}]: expected object")
    return raw


def _parse_npt_directive(raw: Any, path: str) -> NptDirective | None:
    if raw is None:
        return None
    if not isinstance(raw, Mapping):
        raise ModelSyntaxError(f"{path}: expected object")
    kind = _text(_require(raw, "type", path), f"{path}.type")
    if kind not in NPT_DIRECTIVE_TYPES:
        raise ModelSyntaxError(
            f"{path}.type: {kind!r} is not one of {', '.join(NPT_DIRECTIVE_TYPES)}"
        )
    sigma = raw.get("sigma")
    epsilon = raw.get("epsilon")
    rows_raw = raw.get("rows")
    rows: tuple[tuple[float, ...], ...] | None = None
    if rows_raw is not None:
        if not isinstance(rows_raw, list) or not all(isinstance(r, list) for r in rows_raw):
            raise ModelSyntaxError(f"{path}.rows: expected array of arrays")
        rows = tuple(
            tuple(_number(v, f"{path}.rows[{i}][{j}]") for j, v in enumerate(row))
            for i, row in enumerate(rows_raw)
        )
    return NptDirective(
        type=kind,
        sigma=None if sigma is None else _number(sigma, f"{path}.sigma"),
        epsilon=None if epsilon is None else _number(epsilon, f"{path}.epsilon"),
        rows=rows,
    )


def parse_model(document: str) -> QualityModel:
    """Parse a UTF-8 JSON model document and check every invariant.

    Raises `ModelSyntaxError` (with position or JSON path) for malformed
    input and `ModelIntegrityError` (carrying all violations) when the
    document is well-formed but inconsistent.
    """
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ModelSyntaxError(
            f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(doc, Mapping):
        raise ModelSyntaxError("document: expected a JSON object at top level")

    entities = []
    for i, raw in enumerate(_obj_list(doc, "entities")):
        path = f"entities[{i}]"
        entities.append(Entity(
            id=_text(_require(raw, "id", path), f"{path}.id"),
            name=_text(_require(raw, "name", path), f"{path}.name"),
            parent=_opt_text(raw, "parent", path),
        ))

    activities = []
    for i, raw in enumerate(_obj_list(doc, "activities")):
        path = f"activities[{i}]"
        activities.append(Activity(
            id=_text(_require(raw, "id", path), f"{path}.id"),
            name=_text(_require(raw, "name", path), f"{path}.name"),
            parent=_opt_text(raw, "parent", path),
            npt=_parse_npt_directive(raw.get("npt"), f"{path}.npt"),
        ))

    factors = []
    for i, raw in enumerate(_obj_list(doc, "factors")):
        path = f"factors[{i}]"
        factors.append(Factor(
            id=_text(_require(raw, "id", path), f"{path}.id"),
            entity=_text(_require(raw, "entity", path), f"{path}.entity"),
            property=_text(_require(raw, "property", path), f"{path}.property"),
            name=_text(_require(raw, "name", path), f"{path}.name"),
            npt=_parse_npt_directive(raw.get("npt"), f"{path}.npt"),
        ))

    impacts = []
    for i, raw in enumerate(_obj_list(doc, "impacts")):
        path = f"impacts[{i}]"
        polarity_raw = _text(_require(raw, "polarity", path), f"{path}.polarity")
        try:
            polarity = Polarity(polarity_raw)
        except ValueError:
            raise ModelSyntaxError(
                f"{path}.polarity: expected '+' or '-', got {polarity_raw!r}"
            ) from None
        weight = raw.get("weight", 1.0)
        impacts.append(Impact(
            id=_text(_require(raw, "id", path), f"{path}.id"),
            source=_text(_require(raw, "source", path), f"{path}.source"),
            target=_text(_require(raw, "target", path), f"{path}.target"),
            polarity=polarity,
            weight=_number(weight, f"{path}.weight"),
        ))

    measures = []
    for i, raw in enumerate(_obj_list(doc, "measures")):
        path = f"measures[{i}]"
        kind_raw = _text(_require(raw, "kind", path), f"{path}.kind")
        try:
            kind = MeasureKind(kind_raw)
        except ValueError:
            raise ModelSyntaxError(
                f"{path}.kind: expected 'scanner-finding' or 'numeric-metric', "
                f"got {kind_raw!r}"
            ) from None
        diag = raw.get("diagnosticity")
        measures.append(Measure(
            id=_text(_require(raw, "id", path), f"{path}.id"),
            name=_text(_require(raw, "name", path), f"{path}.name"),
            target=_text(_require(raw, "target", path), f"{path}.target"),
            kind=kind,
            vuln_class=_opt_text(raw, "vulnClass", path),
            diagnosticity=None if diag is None else _number(diag, f"{path}.diagnosticity"),
            npt=_parse_npt_directive(raw.get("npt"), f"{path}.npt"),
        ))

    model = QualityModel(
        goal=_text(_require(doc, "goal", "document"), "goal"),
        question=_text(_require(doc, "question", "document"), "question"),
        metric=_text(_require(doc, "metric", "document"), "metric"),
        entities=tuple(entities),
        activities=tuple(activities),
        factors=tuple(factors),
        impacts=tuple(impacts),
        measures=tuple(measures),
    )
    issues = validate_model(model)
    if issues:
        raise ModelIntegrityError(issues)
    return model


def load_model(path) -> QualityModel:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_model(handle.read())


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def _find_cycle(ids: Iterable[str], parent_of: Mapping[str, str | None]) -> list[str] | None:
    """Return one parent-link cycle as a path [a, b, ..., a], or None."""
    state: dict[str, int] = {}  # 0 visiting, 1 done
    for start in ids:
        if state.get(start) == 1:
            continue
        path: list[str] = []
        node: str | None = start
        while node is not None and node in parent_of:
            if state.get(node) == 1:
                break
            if node in path:
                cycle = path[path.index(node):] + [node]
                return cycle
            path.append(node)
            node = parent_of.get(node)
        for seen in path:
            state[seen] = 1
    return None


def _duplicates(items: Iterable[str]) -> list[str]:
    seen: set[str] = set()
    dupes: list[str] = []
    for item in items:
        if item in seen and item not in dupes:
            dupes.append(item)
        seen.add(item)
    return dupes


def validate_model(model: QualityModel) -> list[ValidationIssue]:
    """Collect every invariant violation; an empty list means valid."""
    issues: list[ValidationIssue] = []

    def bad(code: str, message: str, element: str | None = None) -> None:
        issues.append(ValidationIssue(code, message, element))

    entity_ids = [e.id for e in model.entities]
    activity_ids = [a.id for a in model.activities]
    factor_ids = [f.id for f in model.factors]
    for collection, ids in (("entity", entity_ids), ("activity", activity_ids),
                            ("factor", factor_ids),
                            ("impact", [i.id for i in model.impacts]),
                            ("measure", [m.id for m in model.measures])):
        for dup in _duplicates(ids):
            bad("duplicate-id", f"duplicate {collection} id {dup!r}", dup)

    if not model.activities:
        bad("no-activities", "at least one activity required")

    entity_set = set(entity_ids)
    activity_set = set(activity_ids)
    factor_set = set(factor_ids)

    for entity in model.entities:
        if entity.parent is not None and entity.parent not in entity_set:
            bad("dangling-ref",
                f"entity {entity.id!r} has unknown parent {entity.parent!r}",
                entity.id)
    for activity in model.activities:
        if activity.parent is not None and activity.parent not in activity_set:
            bad("dangling-ref",
                f"activity {activity.id!r} has unknown parent {activity.parent!r}",
                activity.id)

    cycle = _find_cycle(entity_ids, {e.id: e.parent for e in model.entities})
    if cycle:
        bad("cycle", "entity parent cycle: " + " -> ".join(cycle))
    cycle = _find_cycle(activity_ids, {a.id: a.parent for a in model.activities})
    if cycle:
        bad("cycle", "activity parent cycle: " + " -> ".join(cycle))
    else:
        roots = [a.id for a in model.activities if a.parent is None]
        if model.activities and len(roots) != 1:
            bad("multiple-activity-roots",
                f"activity hierarchy must have exactly one root, found {roots!r}")

    seen_pairs: set[tuple[str, str]] = set()
    for factor in model.factors:
        if factor.entity not in entity_set:
            bad("dangling-ref",
                f"factor {factor.id!r} references unknown entity {factor.entity!r}",
                factor.id)
        pair = (factor.entity, factor.property)
        if pair in seen_pairs:
            bad("duplicate-factor",
                f"factors share entity/property pair {pair!r}", factor.id)
        seen_pairs.add(pair)

    for impact in model.impacts:
        if impact.source not in factor_set:
            bad("dangling-ref",
                f"impact {impact.id!r} has unknown source factor {impact.source!r}",
                impact.id)
        if impact.target not in activity_set:
            bad("dangling-ref",
                f"impact {impact.id!r} has unknown target activity {impact.target!r}",
                impact.id)
        if not (math.isfinite(impact.weight) and impact.weight > 0.0):
            bad("bad-weight",
                f"impact {impact.id!r} weight must be finite and positive, "
                f"got {impact.weight}", impact.id)

    for measure in model.measures:
        if measure.target not in factor_set and measure.target not in activity_set:
            bad("dangling-ref",
                f"measure {measure.id!r} has unknown target {measure.target!r}",
                measure.id)
        if measure.kind is MeasureKind.SCANNER_FINDING and not measure.vuln_class:
            bad("missing-vuln-class",
                f"scanner-finding measure {measure.id!r} needs a vulnerability class",
                measure.id)
        if measure.diagnosticity is not None and not (0.0 < measure.diagnosticity <= 0.5):
            bad("bad-diagnosticity",
                f"measure {measure.id!r} diagnosticity must lie in (0, 0.5], "
                f"got {measure.diagnosticity}", measure.id)

    _validate_npt_directives(model, bad)
    return issues


def _validate_npt_directives(model: QualityModel, bad) -> None:
    allowed = {
        "activity": {"wmean", "explicit"},
        "factor": {"explicit"},
        "measure": {"partition", "explicit", "arithmetic"},
    }
    elements = (
        [("activity", a) for a in model.activities]
        + [("factor", f) for f in model.factors]
        + [("measure", m) for m in model.measures]
    )
    for kind, elem in elements:
        directive = elem.npt
        if directive is None:
            continue
        if directive.type not in allowed[kind]:
            bad("bad-npt",
                f"{kind} {elem.id!r} cannot carry an NPT of type {directive.type!r}",
                elem.id)
            continue
        if directive.type == "wmean" and directive.sigma is not None and directive.sigma <= 0:
            bad("bad-npt", f"{kind} {elem.id!r} wmean sigma must be > 0", elem.id)
        if directive.type == "partition":
            eps = directive.epsilon
            if eps is None or not (0.0 < eps <= 0.5):
                bad("bad-npt",
                    f"{kind} {elem.id!r} partition epsilon must lie in (0, 0.5]",
                    elem.id)
        if directive.type == "explicit":
            rows = directive.rows
            if not rows:
                bad("bad-npt", f"{kind} {elem.id!r} explicit NPT needs rows", elem.id)
                continue
            for row in rows:
                if any(p < 0.0 or p > 1.0 for p in row) or abs(sum(row) - 1.0) > 1e-9:
                    bad("bad-npt",
                        f"{kind} {elem.id!r} explicit NPT rows must be "
                        "distributions (entries in [0,1], sum 1)", elem.id)
                    break
        if directive.type == "arithmetic" and kind == "measure":
            measure = elem
            if measure.kind is not MeasureKind.NUMERIC_METRIC:
                bad("bad-npt",
                    f"measure {elem.id!r} arithmetic NPTs apply to "
                    "numeric-metric measures only", elem.id)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _npt_directive_dict(directive: NptDirective | None) -> dict[str, Any] | None:
    if directive is None:
        return None
    out: dict[str, Any] = {"type": directive.type}
    if directive.sigma is not None:
        out["sigma"] = directive.sigma
    if directive.epsilon is not None:
        out["epsilon"] = directive.epsilon
    if directive.rows is not None:
        out["rows"] = [list(row) for row in directive.rows]
    return out


def model_to_dict(model: QualityModel) -> dict[str, Any]:
    def strip(obj: dict[str, Any]) -> dict[str, Any]:
        return {k: v for k, v in obj.items() if v is not None}

    return {
        "goal": model.goal,
        "question": model.question,
        "metric": model.metric,
        "entities": [strip({"id": e.id, "name": e.name, "parent": e.parent})
                     for e in model.entities],
        "activities": [strip({"id": a.id, "name": a.name, "parent": a.parent,
                              "npt": _npt_directive_dict(a.npt)})
                       for a in model.activities],
        "factors": [strip({"id": f.id, "entity": f.entity, "property": f.property,
                           "name": f.name, "npt": _npt_directive_dict(f.npt)})
                    for f in model.factors],
        "impacts": [strip({"id": i.id, "source": i.source, "target": i.target,
                           "polarity": i.polarity.value, "weight": i.weight})
                    for i in model.impacts],
        "measures": [strip({"id": m.id, "name": m.name, "target": m.target,
                            "kind": m.kind.value, "vulnClass": m.vuln_class,
                            "diagnosticity": m.diagnosticity,
                            "npt": _npt_directive_dict(m.npt)})
                     for m in model.measures],
    }


def serialize_model(model: QualityModel) -> str:
    """Render a model back to its JSON document form (round-trip safe)."""
    return json.dumps(model_to_dict(model), indent=2, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------------------
# Hierarchy walks
# ---------------------------------------------------------------------------

def activity_subtree(model: QualityModel, root: str) -> list[str]:
    """Depth-first preorder of the activity subtree rooted at `root`.

    Children are visited in model document order.
    """
    model.activity(root)  # raises UnknownIdError for bad roots
    order: list[str] = []
    stack = [root]
    while stack:
        current = stack.pop()
        order.append(current)
        children = [a.id for a in model.activity_children(current)]
        stack.extend(reversed(children))
    return order
