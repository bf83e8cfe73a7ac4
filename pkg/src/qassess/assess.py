"""End-to-end assessment pipeline and interactive what-if sessions."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Iterable, Mapping

from .bayes import BayesNet, NodeKind, Posterior, query_marginal
from .derive import AssessmentPlan, derive_net
from .errors import BundleError, PipelineError, QaError
from .findings import (
    AgreementMatrix,
    FindingsReport,
    ObservationSet,
    UnresolvedClass,
    VulnTaxonomy,
    classify,
    scanner_diff,
    vote,
)
from .qmodel import ModelIntegrityError, QualityModel, validate_model


@dataclass(frozen=True)
class SystemDescriptor:
    id: str
    name: str
    sloc: int
    language: str = ""
    version: str = ""

    def __post_init__(self) -> None:
        if not self.id:
            raise BundleError("system descriptor needs a non-empty id")
        if not isinstance(self.sloc, int) or self.sloc <= 0:
            raise BundleError(f"system sloc must be a positive integer, got {self.sloc!r}")


def parse_system(document: str) -> SystemDescriptor:
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise BundleError(
            f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(doc, Mapping) or "id" not in doc or "sloc" not in doc:
        raise BundleError("system descriptor needs at least 'id' and 'sloc'")
    return SystemDescriptor(
        id=str(doc["id"]),
        name=str(doc.get("name", doc["id"])),
        sloc=doc["sloc"],
        language=str(doc.get("language", "")),
        version=str(doc.get("version", "")),
    )


def load_system(path) -> SystemDescriptor:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_system(handle.read())


@dataclass(frozen=True)
class PosteriorEntry:
    """One node's posterior enriched with display metadata."""

    node: str
    kind: str
    name: str
    states: tuple[str, ...]
    probabilities: tuple[float, ...]
    mean: float | None
    sd: float | None


@dataclass(frozen=True)
class AssessmentReport:
    system: SystemDescriptor
    goal: str
    question: str
    metric: str
    observations: ObservationSet
    posteriors: tuple[PosteriorEntry, ...]
    density_mean: float
    density_sd: float
    expected_vuln_count: float
    scanner_agreement: AgreementMatrix
    unresolved: tuple[UnresolvedClass, ...]
    timestamp: str


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds").replace(
        "+00:00", "Z"
    )


def observations_to_evidence(net: BayesNet,
                             observations: ObservationSet) -> dict[str, int]:
    """Translate yes/no votes into state indices on the measure nodes."""
    evidence: dict[str, int] = {}
    for measure_id, value in observations.values.items():
        node = net.node(measure_id)
        evidence[measure_id] = node.state_index(value)
    return evidence


def _element_name(model: QualityModel, plan: AssessmentPlan, node_id: str) -> str:
    if node_id == plan.metric.name:
        return plan.metric.name
    return model.element(node_id).name


def run_assessment(model: QualityModel, plan: AssessmentPlan,
                   reports: Iterable[FindingsReport], taxonomy: VulnTaxonomy,
                   system: SystemDescriptor) -> AssessmentReport:
    """Full pipeline: validate, derive, classify, vote, infer, report.

    Deterministic for fixed inputs except for the timestamp field.
    """
    try:
        issues = validate_model(model)
        if issues:
            raise ModelIntegrityError(issues)
    except QaError as exc:
        raise PipelineError("validate", exc) from exc

    try:
        net, node_map = derive_net(model, plan)
    except QaError as exc:
        raise PipelineError("derive", exc) from exc

    try:
        counts = classify(list(reports), taxonomy)
        agreement = scanner_diff(counts)
    except QaError as exc:
        raise PipelineError("classify", exc) from exc

    try:
        observations = vote(counts, taxonomy, model, system.id)
    except QaError as exc:
        raise PipelineError("vote", exc) from exc

    try:
        evidence = observations_to_evidence(net, observations)
        entries = []
        density_mean = density_sd = 0.0
        for node in net.nodes.values():
            if node.kind is NodeKind.MEASURE:
                continue
            posterior = query_marginal(net, evidence, node.id)
            entries.append(PosteriorEntry(
                node=node.id,
                kind=node.kind.value,
                name=_element_name(model, plan, node.id),
                states=node.states,
                probabilities=tuple(float(p) for p in posterior.probabilities),
                mean=posterior.mean,
                sd=posterior.sd,
            ))
            if node.kind is NodeKind.METRIC:
                density_mean = float(posterior.mean)
                density_sd = float(posterior.sd)
    except QaError as exc:
        raise PipelineError("infer", exc) from exc

    return AssessmentReport(
        system=system,
        goal=model.goal,
        question=model.question,
        metric=model.metric,
        observations=observations,
        posteriors=tuple(entries),
        density_mean=density_mean,
        density_sd=density_sd,
        expected_vuln_count=density_mean * system.sloc / 1000.0,
        scanner_agreement=agreement,
        unresolved=counts.unresolved,
        timestamp=_utc_now(),
    )


# ---------------------------------------------------------------------------
# What-if sessions
# ---------------------------------------------------------------------------

@dataclass
class WhatIfSession:
    """Mutable evidence overlay over an immutable derived net.

    `overrides` maps node ids to a state index, or to None to mask base
    evidence on that node. An empty override map reproduces the base
    assessment's posteriors exactly.
    """

    session_id: str
    net: BayesNet
    metric_node: str
    base_evidence: Mapping[str, int]
    overrides: dict[str, int | None] = field(default_factory=dict)

    def effective_evidence(self) -> dict[str, int]:
        evidence = dict(self.base_evidence)
        for node_id, state in self.overrides.items():
            if state is None:
                evidence.pop(node_id, None)
            else:
                evidence[node_id] = state
        return evidence


@dataclass(frozen=True)
class WhatIfResult:
    posteriors: Mapping[str, Posterior]
    density_mean: float
    density_sd: float
    evidence: Mapping[str, int]


def evaluate_session(session: WhatIfSession) -> WhatIfResult:
    """Posteriors for every node under base evidence merged with overrides."""
    evidence = session.effective_evidence()
    posteriors = {
        node_id: query_marginal(session.net, evidence, node_id)
        for node_id in session.net.nodes
    }
    metric = posteriors[session.metric_node]
    return WhatIfResult(
        posteriors=posteriors,
        density_mean=float(metric.mean),
        density_sd=float(metric.sd),
        evidence=evidence,
    )


def what_if(session: WhatIfSession, node: str | None = None,
            state: str | None = None, clear: bool = False) -> WhatIfResult:
    """Apply one change to the session and return updated posteriors.

    Change forms: a state label overrides the node's evidence; state None
    masks its base evidence; `clear=True` drops the node's override
    (all overrides when node is None). On inconsistent evidence the
    session is left unchanged and the error re-raised.
    """
    snapshot = dict(session.overrides)
    try:
        if clear:
            if node is None:
                session.overrides.clear()
            else:
                session.net.node(node)
                session.overrides.pop(node, None)
        else:
            if node is None:
                raise QaError("what-if change needs a node id")
            target = session.net.node(node)
            session.overrides[node] = (
                None if state is None else target.state_index(state)
            )
        return evaluate_session(session)
    except QaError:
        session.overrides = snapshot
        raise


# ---------------------------------------------------------------------------
# Report emission
# ---------------------------------------------------------------------------

def report_to_dict(report: AssessmentReport) -> dict[str, Any]:
    return {
        "schemaVersion": 1,
        "system": {
            "id": report.system.id,
            "name": report.system.name,
            "sloc": report.system.sloc,
            "language": report.system.language,
            "version": report.system.version,
        },
        "goal": report.goal,
        "question": report.question,
        "metric": report.metric,
        "observations": {k: report.observations.values[k]
                         for k in sorted(report.observations.values)},
        "posteriors": [
            {
                "node": entry.node,
                "kind": entry.kind,
                "name": entry.name,
                "states": list(entry.states),
                "probabilities": list(entry.probabilities),
                "mean": entry.mean,
                "sd": entry.sd,
            }
            for entry in report.posteriors
        ],
        "densityMean": report.density_mean,
        "densitySd": report.density_sd,
        "expectedVulnCount": report.expected_vuln_count,
        "scannerAgreement": {
            "matrix": {
                system: {cls: list(scanners) for cls, scanners in per_class.items()}
                for system, per_class in report.scanner_agreement.matrix.items()
            },
            "scannerTotals": dict(report.scanner_agreement.scanner_totals),
            "singleSource": report.scanner_agreement.single_source,
            "multiSource": report.scanner_agreement.multi_source,
        },
        "unresolvedClasses": [
            {"system": u.system, "scanner": u.scanner,
             "class": u.vuln_class, "count": u.count}
            for u in report.unresolved
        ],
        "timestamp": report.timestamp,
    }


def _text_report(report: AssessmentReport) -> str:
    lines: list[str] = []
    title = f"Security quality assessment: {report.system.name} ({report.system.id})"
    lines.append(title)
    lines.append("=" * len(title))
    lines.append("")
    lines.append(f"Goal:     {report.goal}")
    lines.append(f"Question: {report.question}")
    lines.append(f"Metric:   {report.metric}")
    lines.append("")
    lines.append(
        f"Predicted vulnerability density: mean {report.density_mean:.4f}, "
        f"sd {report.density_sd:.4f}"
    )
    lines.append(
        f"Expected vulnerabilities at {report.system.sloc} SLOC: "
        f"{report.expected_vuln_count:.2f}"
    )
    lines.append("")
    lines.append("Measure observations:")
    votes = report.observations.values
    for measure_id in sorted(votes):
        lines.append(f"  {measure_id:<40} {votes[measure_id]}")
    if not any(v == "yes" for v in votes.values()):
        lines.append("  note: no scanner findings mapped onto any measure")
    lines.append("")
    lines.append("Scanner agreement (findings are not screened for false "
                 "positives; classes seen by a single scanner carry extra "
                 "uncertainty):")
    for system, per_class in report.scanner_agreement.matrix.items():
        for cls, scanners in per_class.items():
            lines.append(f"  {system}/{cls}: {', '.join(scanners)}")
    totals = ", ".join(f"{scanner}={n}" for scanner, n
                       in report.scanner_agreement.scanner_totals.items())
    lines.append(f"  totals: {totals}")
    lines.append(
        f"  classes found by one scanner: {report.scanner_agreement.single_source}, "
        f"by several: {report.scanner_agreement.multi_source}"
    )
    if report.unresolved:
        lines.append("")
        lines.append("Findings with classes unknown to the taxonomy:")
        for u in report.unresolved:
            lines.append(f"  {u.system}/{u.scanner}: {u.vuln_class} x{u.count}")
    lines.append("")
    lines.append("Node posteriors:")
    for entry in report.posteriors:
        dist = ", ".join(
            f"{state}={p:.4f}" for state, p in zip(entry.states, entry.probabilities)
        ) if entry.kind != "metric" else f"mean={entry.mean:.4f}, sd={entry.sd:.4f}"
        lines.append(f"  [{entry.kind}] {entry.name}: {dist}")
    lines.append("")
    lines.append(f"Generated: {report.timestamp}")
    return "\n".join(lines) + "\n"


def emit_report(report: AssessmentReport, format: str = "json") -> str:
    """Render a report as machine-readable JSON or a human text summary."""
    if format == "json":
        return json.dumps(report_to_dict(report), indent=2, ensure_ascii=False) + "\n"
    if format == "text":
        return _text_report(report)
    raise QaError(f"unknown report format {format!r} (expected json or text)")
