"""Shared fixtures: case-study bundle paths and loaded objects."""

from __future__ import annotations

from pathlib import Path

import pytest

from qassess import load_model, load_plan, load_report, load_taxonomy
from qassess.assess import load_system

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
DOCS = Path(__file__).resolve().parent.parent / "docs"

SCANNERS = ("w3af", "wapiti", "grendel")


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def model():
    return load_model(FIXTURES / "casestudy.qm.json")


@pytest.fixture(scope="session")
def plan():
    return load_plan(FIXTURES / "casestudy.plan.json")


@pytest.fixture(scope="session")
def taxonomy():
    return load_taxonomy(FIXTURES / "casestudy.taxonomy.json")


def reports_for(system: str):
    return [load_report(FIXTURES / f"{system}.{scanner}.findings.json")
            for scanner in SCANNERS]


@pytest.fixture(scope="session")
def phpshop_reports():
    return reports_for("phpshop")


@pytest.fixture(scope="session")
def zencart_reports():
    return reports_for("zencart")


@pytest.fixture(scope="session")
def phpshop_system():
    return load_system(FIXTURES / "phpshop.system.json")


@pytest.fixture(scope="session")
def zencart_system():
    return load_system(FIXTURES / "zencart.system.json")
