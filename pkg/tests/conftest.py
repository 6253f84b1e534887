from __future__ import annotations

import json
import pathlib
import sys

import pytest

HERE = pathlib.Path(__file__).parent
sys.path.insert(0, str(HERE))  # oracle.py / generators.py as plain modules

from kmcheck.dsl import parse_system

FIXTURES = HERE / "fixtures"
GOLDEN = HERE / "golden" / "oracle.json"


def fixture_text(name: str) -> str:
    return (FIXTURES / name).read_text()


def fixture_system(name: str):
    return parse_system(fixture_text(name))


@pytest.fixture(scope="session")
def golden() -> dict:
    return json.loads(GOLDEN.read_text())
