"""HTTP what-if service over a fixed assessment bundle.

One `WhatIfSession` per client session token (header `X-Session-Token`,
default "default"); requests for the same token are serialized, distinct
tokens share the immutable net. Binds to loopback by default and speaks
plain JSON; this is a single-analyst desk tool, not a multi-user server.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from fastapi import FastAPI, Header, HTTPException
from fastapi.responses import HTMLResponse, JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .assess import (
    AssessmentReport,
    SystemDescriptor,
    WhatIfSession,
    evaluate_session,
    load_system,
    observations_to_evidence,
    report_to_dict,
    run_assessment,
    what_if,
)
from .bayes import BayesNet
from .derive import AssessmentPlan, NodeMap, derive_net, load_plan
from .errors import InconsistentEvidenceError, UnknownIdError
from .findings import FindingsReport, VulnTaxonomy, load_report, load_taxonomy
from .qmodel import QualityModel, load_model


@dataclass
class AssessmentBundle:
    """Everything the service needs: inputs, derived net, base report."""

    model: QualityModel
    plan: AssessmentPlan
    taxonomy: VulnTaxonomy
    system: SystemDescriptor
    reports: tuple[FindingsReport, ...]
    net: BayesNet
    node_map: NodeMap
    base_report: AssessmentReport
    base_evidence: dict[str, int] = field(default_factory=dict)


def load_bundle(model_path, plan_path, taxonomy_path, system_path,
                findings_paths: Iterable) -> AssessmentBundle:
    model = load_model(model_path)
    plan = load_plan(plan_path)
    taxonomy = load_taxonomy(taxonomy_path)
    system = load_system(system_path)
    reports = tuple(load_report(p) for p in findings_paths)
    base_report = run_assessment(model, plan, reports, taxonomy, system)
    net, node_map = derive_net(model, plan)
    base_evidence = observations_to_evidence(net, base_report.observations)
    return AssessmentBundle(
        model=model, plan=plan, taxonomy=taxonomy, system=system,
        reports=reports, net=net, node_map=node_map,
        base_report=base_report, base_evidence=base_evidence,
    )


class ObservationChange(BaseModel):
    node: str
    state: str | None = None


_FALLBACK_PAGE = """<!doctype html>
<html><head><title>qassess what-if service</title></head>
<body>
<h1>qassess what-if service</h1>
<p>The web UI bundle is not installed. The JSON API is live:</p>
<ul>
<li>GET /api/net</li>
<li>GET /api/posteriors</li>
<li>POST /api/observations {"node": ..., "state": ...}</li>
<li>DELETE /api/observations</li>
<li>GET /api/report</li>
</ul>
</body></html>
"""


def create_app(bundle: AssessmentBundle, webui_dir: Path | None = None) -> FastAPI:
    app = FastAPI(title="qassess what-if service")

    sessions: dict[str, WhatIfSession] = {}
    locks: dict[str, threading.Lock] = {}
    registry_lock = threading.Lock()

    def session_for(token: str) -> tuple[WhatIfSession, threading.Lock]:
        with registry_lock:
            if token not in sessions:
                sessions[token] = WhatIfSession(
                    session_id=token,
                    net=bundle.net,
                    metric_node=bundle.plan.metric.name,
                    base_evidence=dict(bundle.base_evidence),
                )
                locks[token] = threading.Lock()
            return sessions[token], locks[token]

    def posteriors_payload(session: WhatIfSession) -> dict[str, Any]:
        result = evaluate_session(session)
        nodes: dict[str, Any] = {}
        for node_id, posterior in result.posteriors.items():
            node = bundle.net.node(node_id)
            observed = result.evidence.get(node_id)
            nodes[node_id] = {
                "states": list(node.states),
                "probabilities": [float(p) for p in posterior.probabilities],
                "mean": posterior.mean,
                "sd": posterior.sd,
                "evidence": None if observed is None else node.states[observed],
            }
        return {
            "posteriors": nodes,
            "densityMean": result.density_mean,
            "densitySd": result.density_sd,
            "overrides": {
                node_id: (None if state is None
                          else bundle.net.node(node_id).states[state])
                for node_id, state in session.overrides.items()
            },
        }

    @app.get("/api/net")
    def get_net() -> dict[str, Any]:
        nodes = []
        for node in bundle.net.nodes.values():
            element = bundle.node_map.trace(node.id)
            name = element
            if node.id != bundle.plan.metric.name:
                name = bundle.model.element(element).name
            nodes.append({
                "id": node.id,
                "kind": node.kind.value,
                "name": name,
                "states": list(node.states),
                "parents": list(node.parents),
            })
        return {"nodes": nodes, "system": bundle.system.id}

    @app.get("/api/posteriors")
    def get_posteriors(
        x_session_token: str = Header(default="default")
    ) -> dict[str, Any]:
        session, lock = session_for(x_session_token)
        with lock:
            return posteriors_payload(session)

    @app.post("/api/observations")
    def post_observation(
        change: ObservationChange,
        x_session_token: str = Header(default="default"),
    ) -> dict[str, Any]:
        session, lock = session_for(x_session_token)
        with lock:
            try:
                what_if(session, node=change.node, state=change.state)
            except UnknownIdError as exc:
                raise HTTPException(status_code=404, detail=str(exc)) from exc
            except InconsistentEvidenceError as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from exc
            return posteriors_payload(session)

    @app.delete("/api/observations")
    def delete_observations(
        node: str | None = None,
        x_session_token: str = Header(default="default"),
    ) -> dict[str, Any]:
        session, lock = session_for(x_session_token)
        with lock:
            try:
                what_if(session, node=node, clear=True)
            except UnknownIdError as exc:
                raise HTTPException(status_code=404, detail=str(exc)) from exc
            return posteriors_payload(session)

    @app.get("/api/report")
    def get_report() -> JSONResponse:
        return JSONResponse(report_to_dict(bundle.base_report))

    if webui_dir is not None and Path(webui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(webui_dir), html=True),
                  name="webui")
    else:
        @app.get("/", response_class=HTMLResponse)
        def index() -> str:
            return _FALLBACK_PAGE

    return app
