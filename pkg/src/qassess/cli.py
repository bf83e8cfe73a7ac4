"""Command-line interface: validate, derive, assess, whatif, serve.

Exit codes: 0 success, 1 domain or pipeline error, 2 I/O or usage error.
The QA_LOG environment variable sets the log level (debug/info/warning).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .assess import emit_report, evaluate_session, run_assessment, what_if
from .assess import WhatIfSession, load_system, observations_to_evidence
from .derive import derive_net, export_net, load_plan
from .errors import QaError
from .findings import classify, load_report, load_taxonomy, vote
from .qmodel import load_model, validate_model

log = logging.getLogger("qassess")

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_IO = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qa",
        description="Quality assessment from scanner findings via a "
                    "model-derived Bayesian net.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="check a quality model file")
    p_validate.add_argument("--model", required=True, type=Path)

    p_derive = sub.add_parser("derive", help="derive the Bayesian net")
    p_derive.add_argument("--model", required=True, type=Path)
    p_derive.add_argument("--plan", required=True, type=Path)
    p_derive.add_argument("--emit-net", required=True, type=Path,
                          help="write the derived net (nodes, NPTs) as JSON")

    def add_bundle_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("--model", required=True, type=Path)
        p.add_argument("--plan", required=True, type=Path)
        p.add_argument("--taxonomy", required=True, type=Path)
        p.add_argument("--system", required=True, type=Path)
        p.add_argument("--findings", type=Path, nargs="*", default=[],
                       help="normalized findings reports (zero or more)")

    p_assess = sub.add_parser("assess", help="run a full assessment")
    add_bundle_args(p_assess)
    p_assess.add_argument("--out", required=True, type=Path)
    p_assess.add_argument("--format", choices=("json", "text"), default="json")
    p_assess.add_argument("--figures", type=Path, default=None,
                          help="also render figures and a posterior table "
                               "into this directory")

    p_whatif = sub.add_parser("whatif", help="one-shot override evaluation")
    add_bundle_args(p_whatif)
    p_whatif.add_argument("--set", dest="overrides", action="append",
                          default=[], metavar="NODE=STATE",
                          help="override a node (repeatable); STATE 'clear' "
                               "masks the base observation")
    p_whatif.add_argument("--out", type=Path, default=None,
                          help="write the full posterior set as JSON")

    p_serve = sub.add_parser("serve", help="run the interactive what-if service")
    add_bundle_args(p_serve)
    p_serve.add_argument("--port", type=int, default=8350)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--webui", type=Path, default=None,
                         help="directory with the web UI bundle "
                              "(default: ./frontend/dist when present)")
    return parser


def cmd_validate(args: argparse.Namespace) -> int:
    from .qmodel import parse_model
    from .errors import ModelIntegrityError, ModelSyntaxError

    try:
        text = args.model.read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read {args.model}: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        model = parse_model(text)
    except ModelIntegrityError as exc:
        for issue in exc.issues:
            print(issue)
        return EXIT_DOMAIN
    except ModelSyntaxError as exc:
        print(f"syntax: {exc}")
        return EXIT_DOMAIN
    issues = validate_model(model)
    for issue in issues:
        print(issue)
    return EXIT_DOMAIN if issues else EXIT_OK


def cmd_derive(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    plan = load_plan(args.plan)
    net, node_map = derive_net(model, plan)
    document = export_net(net, node_map)
    args.emit_net.write_text(
        json.dumps(document, indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    print(f"derived net with {len(net.nodes)} nodes -> {args.emit_net}")
    return EXIT_OK


def _load_bundle_inputs(args: argparse.Namespace):
    model = load_model(args.model)
    plan = load_plan(args.plan)
    taxonomy = load_taxonomy(args.taxonomy)
    system = load_system(args.system)
    reports = [load_report(path) for path in args.findings]
    return model, plan, taxonomy, system, reports


def cmd_assess(args: argparse.Namespace) -> int:
    model, plan, taxonomy, system, reports = _load_bundle_inputs(args)
    report = run_assessment(model, plan, reports, taxonomy, system)
    args.out.write_text(emit_report(report, args.format), encoding="utf-8")
    print(f"{system.id}: density mean {report.density_mean:.4f}, "
          f"sd {report.density_sd:.4f} -> {args.out}")
    if args.figures is not None:
        from .figures import render_report_figures
        for path in render_report_figures(report, args.figures):
            log.info("wrote %s", path)
        print(f"figures -> {args.figures}")
    return EXIT_OK


def cmd_whatif(args: argparse.Namespace) -> int:
    model, plan, taxonomy, system, reports = _load_bundle_inputs(args)
    counts = classify(reports, taxonomy)
    observations = vote(counts, taxonomy, model, system.id)
    net, _ = derive_net(model, plan)
    session = WhatIfSession(
        session_id="cli",
        net=net,
        metric_node=plan.metric.name,
        base_evidence=observations_to_evidence(net, observations),
    )
    for item in args.overrides:
        if "=" not in item:
            print(f"error: --set expects NODE=STATE, got {item!r}", file=sys.stderr)
            return EXIT_IO
        node, state = item.split("=", 1)
        what_if(session, node=node, state=None if state == "clear" else state)
    result = evaluate_session(session)
    print(f"{system.id}: density mean {result.density_mean:.4f}, "
          f"sd {result.density_sd:.4f} "
          f"({len(session.overrides)} override(s))")
    if args.out is not None:
        document = {
            "system": system.id,
            "overrides": {k: (None if v is None else net.node(k).states[v])
                          for k, v in session.overrides.items()},
            "densityMean": result.density_mean,
            "densitySd": result.density_sd,
            "posteriors": {
                node_id: {
                    "states": list(net.node(node_id).states),
                    "probabilities": [float(p) for p in post.probabilities],
                    "mean": post.mean,
                    "sd": post.sd,
                }
                for node_id, post in result.posteriors.items()
            },
        }
        args.out.write_text(
            json.dumps(document, indent=2, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import socket

    import uvicorn

    from .service import create_app, load_bundle

    bundle = load_bundle(args.model, args.plan, args.taxonomy, args.system,
                         args.findings)
    webui = args.webui
    if webui is None:
        candidate = Path("frontend") / "dist"
        webui = candidate if candidate.is_dir() else None
    app = create_app(bundle, webui_dir=webui)

    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((args.host, args.port))
    except OSError as exc:
        print(f"error: cannot bind {args.host}:{args.port}: {exc}",
              file=sys.stderr)
        return EXIT_IO
    finally:
        probe.close()

    print(f"serving what-if API on http://{args.host}:{args.port}/ "
          f"(system: {bundle.system.id})")
    uvicorn.run(app, host=args.host, port=args.port,
                log_level=os.environ.get("QA_LOG", "warning").lower())
    return EXIT_OK


_COMMANDS = {
    "validate": cmd_validate,
    "derive": cmd_derive,
    "assess": cmd_assess,
    "whatif": cmd_whatif,
    "serve": cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("QA_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))

    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except QaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
