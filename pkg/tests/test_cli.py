"""CLI commands and exit-code contract (0 ok, 1 domain, 2 I/O or usage)."""

from __future__ import annotations

import json

import pytest

from qassess.cli import main
from conftest import FIXTURES


def fixture_args(system: str) -> list[str]:
    return [
        "--model", str(FIXTURES / "casestudy.qm.json"),
        "--plan", str(FIXTURES / "casestudy.plan.json"),
        "--taxonomy", str(FIXTURES / "casestudy.taxonomy.json"),
        "--system", str(FIXTURES / f"{system}.system.json"),
        "--findings",
        str(FIXTURES / f"{system}.w3af.findings.json"),
        str(FIXTURES / f"{system}.wapiti.findings.json"),
        str(FIXTURES / f"{system}.grendel.findings.json"),
    ]


class TestValidate:
    def test_valid_model_exits_zero_silently(self, capsys):
        code = main(["validate", "--model", str(FIXTURES / "casestudy.qm.json")])
        assert code == 0
        assert capsys.readouterr().out == ""

    def test_dangling_impact_exits_one_with_violation_line(self, tmp_path, capsys):
        doc = json.loads((FIXTURES / "casestudy.qm.json").read_text())
        doc["impacts"][0]["target"] = "a.ghost"
        bad = tmp_path / "bad.qm.json"
        bad.write_text(json.dumps(doc))
        code = main(["validate", "--model", str(bad)])
        assert code == 1
        out = capsys.readouterr().out.strip().splitlines()
        assert len(out) == 1
        assert "dangling-ref" in out[0]

    def test_missing_file_exits_two(self, tmp_path):
        assert main(["validate", "--model", str(tmp_path / "nope.json")]) == 2

    def test_usage_error_exits_two(self):
        with pytest.raises(SystemExit) as exc:
            main(["validate"])  # --model missing
        assert exc.value.code == 2


class TestDerive:
    def test_emit_net(self, tmp_path, capsys):
        out = tmp_path / "net.json"
        code = main([
            "derive",
            "--model", str(FIXTURES / "casestudy.qm.json"),
            "--plan", str(FIXTURES / "casestudy.plan.json"),
            "--emit-net", str(out),
        ])
        assert code == 0
        document = json.loads(out.read_text())
        assert len(document["nodes"]) == 20
        by_id = {n["id"]: n for n in document["nodes"]}
        assert by_id["m.sql-injection"]["parents"] == ["f.sanitation-of-sql-statement"]
        for node in document["nodes"]:
            for row in node["npt"]:
                assert abs(sum(row) - 1.0) <= 1e-9


class TestAssess:
    def test_matches_golden_report_timestamp_masked(self, tmp_path, capsys):
        out = tmp_path / "report.json"
        code = main(["assess", *fixture_args("phpshop"),
                     "--out", str(out), "--format", "json"])
        assert code == 0
        assert "density mean" in capsys.readouterr().out
        produced = json.loads(out.read_text())
        golden = json.loads((FIXTURES / "phpshop.report.json").read_text())
        produced["timestamp"] = golden["timestamp"] = "MASKED"
        assert produced == golden

    def test_zencart_golden(self, tmp_path):
        out = tmp_path / "report.json"
        assert main(["assess", *fixture_args("zencart"),
                     "--out", str(out), "--format", "json"]) == 0
        produced = json.loads(out.read_text())
        golden = json.loads((FIXTURES / "zencart.report.json").read_text())
        produced["timestamp"] = golden["timestamp"] = "MASKED"
        assert produced == golden

    def test_zero_findings_files_gives_all_no(self, tmp_path):
        out = tmp_path / "report.json"
        args = fixture_args("phpshop")
        cut = args.index("--findings")
        code = main(["assess", *args[:cut], "--out", str(out)])
        assert code == 0
        report = json.loads(out.read_text())
        assert set(report["observations"].values()) == {"no"}

    def test_text_format(self, tmp_path):
        out = tmp_path / "report.txt"
        assert main(["assess", *fixture_args("phpshop"),
                     "--out", str(out), "--format", "text"]) == 0
        assert "How many vulnerabilities" in out.read_text()

    def test_bad_plan_root_exits_one_naming_stage(self, tmp_path, capsys):
        plan = json.loads((FIXTURES / "casestudy.plan.json").read_text())
        plan["rootActivity"] = "a.ghost"
        bad = tmp_path / "bad.plan.json"
        bad.write_text(json.dumps(plan))
        args = fixture_args("phpshop")
        args[3] = str(bad)
        code = main(["assess", *args, "--out", str(tmp_path / "r.json")])
        assert code == 1
        assert "derive" in capsys.readouterr().err

    def test_figures_written(self, tmp_path):
        out = tmp_path / "report.json"
        figdir = tmp_path / "figs"
        code = main(["assess", *fixture_args("phpshop"), "--out", str(out),
                     "--figures", str(figdir)])
        assert code == 0
        assert (figdir / "density.png").stat().st_size > 0
        assert (figdir / "posteriors.png").stat().st_size > 0
        assert (figdir / "posteriors.csv").stat().st_size > 0


class TestWhatIf:
    def test_override_raises_density(self, tmp_path, capsys):
        base_out = tmp_path / "base.json"
        assert main(["whatif", *fixture_args("phpshop"),
                     "--out", str(base_out)]) == 0
        over_out = tmp_path / "over.json"
        assert main(["whatif", *fixture_args("phpshop"),
                     "--set", "m.sql-injection=yes",
                     "--out", str(over_out)]) == 0
        base = json.loads(base_out.read_text())
        over = json.loads(over_out.read_text())
        assert over["densityMean"] > base["densityMean"]
        assert over["overrides"] == {"m.sql-injection": "yes"}

    def test_malformed_set_exits_two(self, capsys):
        code = main(["whatif", *fixture_args("phpshop"), "--set", "oops"])
        assert code == 2

    def test_unknown_node_exits_one(self, capsys):
        code = main(["whatif", *fixture_args("phpshop"),
                     "--set", "m.ghost=yes"])
        assert code == 1
