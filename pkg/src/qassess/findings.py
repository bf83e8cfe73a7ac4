"""Scanner findings: normalized-report parsing, classification, voting.

Voting is pessimistic: a measure is observed 'yes' as soon as any one
scanner reports at least one finding of its vulnerability class for the
system under assessment. Findings are never checked for false
positives; the per-scanner agreement matrix is surfaced instead.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from .errors import FindingsError
from .qmodel import QualityModel

Vote = str  # "yes" | "no"


@dataclass(frozen=True)
class Finding:
    scanner: str
    vuln_class: str
    location: str = ""
    detail: str = ""


@dataclass(frozen=True)
class FindingsReport:
    scanner: str
    system: str
    findings: tuple[Finding, ...]


@dataclass(frozen=True)
class VulnClass:
    id: str
    name: str
    attributable: bool
    measure: str | None = None


@dataclass(frozen=True)
class VulnTaxonomy:
    classes: tuple[VulnClass, ...]
    _by_id: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        by_id: dict[str, VulnClass] = {}
        for vuln_class in self.classes:
            if vuln_class.id in by_id:
                raise FindingsError(f"duplicate taxonomy class id {vuln_class.id!r}")
            by_id[vuln_class.id] = vuln_class
        object.__setattr__(self, "_by_id", by_id)

    def get(self, class_id: str) -> VulnClass | None:
        return self._by_id.get(class_id)


@dataclass(frozen=True)
class ObservationSet:
    """Per-measure yes/no evidence for one system, after voting."""

    system: str
    values: Mapping[str, Vote]


@dataclass(frozen=True)
class UnresolvedClass:
    """Findings whose class the taxonomy does not know about."""

    system: str
    scanner: str
    vuln_class: str
    count: int


@dataclass(frozen=True)
class ClassifiedCounts:
    """counts[system][class][scanner] -> number of findings.

    `scanners` and `systems` record every participant seen in the input
    reports, so scanners with zero findings still show up downstream.
    """

    counts: Mapping[str, Mapping[str, Mapping[str, int]]]
    unresolved: tuple[UnresolvedClass, ...]
    scanners: tuple[str, ...] = ()
    systems: tuple[str, ...] = ()

    def total_counted(self) -> int:
        return sum(
            n
            for per_class in self.counts.values()
            for per_scanner in per_class.values()
            for n in per_scanner.values()
        )


@dataclass(frozen=True)
class AgreementMatrix:
    """Which scanners found which vulnerability classes, per system."""

    matrix: Mapping[str, Mapping[str, tuple[str, ...]]]
    scanner_totals: Mapping[str, int]
    single_source: int
    multi_source: int


# ---------------------------------------------------------------------------
# Report parsing (pluggable adapters)
# ---------------------------------------------------------------------------

def _parse_normalized(document: str) -> FindingsReport:
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise FindingsError(
            f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(doc, Mapping):
        raise FindingsError("findings document must be a JSON object")
    for key in ("scanner", "system", "findings"):
        if key not in doc:
            raise FindingsError(f"findings document missing {key!r} key")
    scanner = doc["scanner"]
    system = doc["system"]
    if not isinstance(scanner, str) or not scanner:
        raise FindingsError("'scanner' must be a non-empty string")
    if not isinstance(system, str) or not system:
        raise FindingsError("'system' must be a non-empty string")
    raw_findings = doc["findings"]
    if not isinstance(raw_findings, list):
        raise FindingsError("'findings' must be an array")

    findings = []
    for i, raw in enumerate(raw_findings):
        if not isinstance(raw, Mapping):
            raise FindingsError(f"findings[{i}]: expected object")
        vuln_class = raw.get("class")
        if not isinstance(vuln_class, str) or not vuln_class:
            raise FindingsError(f"findings[{i}]: 'class' must be a non-empty string")
        findings.append(Finding(
            scanner=scanner,
            vuln_class=vuln_class,
            location=str(raw.get("location", "")),
            detail=str(raw.get("detail", "")),
        ))
    return FindingsReport(scanner=scanner, system=system, findings=tuple(findings))


_ADAPTERS: dict[str, Callable[[str], FindingsReport]] = {
    "normalized": _parse_normalized,
}


def register_adapter(name: str, parser: Callable[[str], FindingsReport]) -> None:
    """Register a parser for a scanner's native report format."""
    _ADAPTERS[name] = parser


def parse_report(document: str, adapter: str = "normalized") -> FindingsReport:
    """Parse one scanner report; unknown classes are preserved verbatim."""
    try:
        parser = _ADAPTERS[adapter]
    except KeyError:
        raise FindingsError(
            f"unknown findings adapter {adapter!r} "
            f"(registered: {', '.join(sorted(_ADAPTERS))})"
        ) from None
    return parser(document)


def load_report(path, adapter: str = "normalized") -> FindingsReport:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_report(handle.read(), adapter)


def parse_taxonomy(document: str) -> VulnTaxonomy:
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise FindingsError(
            f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(doc, list):
        raise FindingsError("taxonomy must be a JSON array of classes")
    classes = []
    for i, raw in enumerate(doc):
        if not isinstance(raw, Mapping):
            raise FindingsError(f"taxonomy[{i}]: expected object")
        for key in ("id", "name", "attributable"):
            if key not in raw:
                raise FindingsError(f"taxonomy[{i}]: missing {key!r}")
        if not isinstance(raw["attributable"], bool):
            raise FindingsError(f"taxonomy[{i}]: 'attributable' must be a boolean")
        classes.append(VulnClass(
            id=str(raw["id"]),
            name=str(raw["name"]),
            attributable=raw["attributable"],
            measure=raw.get("measure"),
        ))
    return VulnTaxonomy(tuple(classes))


def load_taxonomy(path) -> VulnTaxonomy:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_taxonomy(handle.read())


# ---------------------------------------------------------------------------
# Classification and voting
# ---------------------------------------------------------------------------

def classify(reports: Iterable[FindingsReport],
             taxonomy: VulnTaxonomy) -> ClassifiedCounts:
    """Count findings per system, class, and scanner.

    Findings whose class is missing from the taxonomy end up in the
    unresolved list instead of being dropped.
    """
    counts: dict[str, dict[str, dict[str, int]]] = {}
    unresolved: dict[tuple[str, str, str], int] = {}
    scanners: set[str] = set()
    systems: set[str] = set()
    for report in reports:
        scanners.add(report.scanner)
        systems.add(report.system)
        for finding in report.findings:
            if taxonomy.get(finding.vuln_class) is None:
                key = (report.system, report.scanner, finding.vuln_class)
                unresolved[key] = unresolved.get(key, 0) + 1
                continue
            per_class = counts.setdefault(report.system, {})
            per_scanner = per_class.setdefault(finding.vuln_class, {})
            per_scanner[report.scanner] = per_scanner.get(report.scanner, 0) + 1
    return ClassifiedCounts(
        counts=counts,
        unresolved=tuple(
            UnresolvedClass(system, scanner, vuln_class, n)
            for (system, scanner, vuln_class), n in sorted(unresolved.items())
        ),
        scanners=tuple(sorted(scanners)),
        systems=tuple(sorted(systems)),
    )


def vote(counts: ClassifiedCounts, taxonomy: VulnTaxonomy, model: QualityModel,
         system: str) -> ObservationSet:
    """Pessimistic yes/no voting for one system.

    A measure votes 'yes' if any scanner reported at least one finding of
    its class; otherwise 'no'. Non-attributable classes never reach the
    net.
    """
    measures = model.scanner_measures()
    measure_ids = {m.id for m in measures}
    values: dict[str, Vote] = {m.id: "no" for m in measures}

    for class_id, per_scanner in sorted(counts.counts.get(system, {}).items()):
        vuln_class = taxonomy.get(class_id)
        if vuln_class is None or not vuln_class.attributable:
            continue
        if sum(per_scanner.values()) < 1:
            continue
        if vuln_class.measure is None:
            raise FindingsError(
                f"attributable class {class_id!r} has findings for "
                f"{system!r} but no measure mapping; map it to a measure or "
                "mark it non-attributable"
            )
        if vuln_class.measure not in measure_ids:
            raise FindingsError(
                f"taxonomy maps class {class_id!r} to unknown scanner-finding "
                f"measure {vuln_class.measure!r}"
            )
        declared = model.element(vuln_class.measure).vuln_class
        if declared is not None and declared != class_id:
            raise FindingsError(
                f"measure {vuln_class.measure!r} is declared for class "
                f"{declared!r} but the taxonomy maps class {class_id!r} to it"
            )
        values[vuln_class.measure] = "yes"

    return ObservationSet(system=system, values=values)


def scanner_diff(counts: ClassifiedCounts) -> AgreementMatrix:
    """Per-class scanner agreement plus single- vs multi-scanner totals."""
    matrix: dict[str, dict[str, tuple[str, ...]]] = {}
    scanner_totals: dict[str, int] = {s: 0 for s in counts.scanners}
    single = 0
    multi = 0
    for system in sorted(counts.counts):
        per_class = counts.counts[system]
        matrix[system] = {}
        for class_id in sorted(per_class):
            scanners = tuple(sorted(
                s for s, n in per_class[class_id].items() if n >= 1
            ))
            matrix[system][class_id] = scanners
            for scanner in scanners:
                scanner_totals[scanner] = scanner_totals.get(scanner, 0) + 1
            if len(scanners) == 1:
                single += 1
            elif len(scanners) > 1:
                multi += 1
    return AgreementMatrix(
        matrix=matrix,
        scanner_totals=dict(sorted(scanner_totals.items())),
        single_source=single,
        multi_source=multi,
    )
