from __future__ import annotations

from pathlib import Path

import pytest

from roadmapper.configuration import enumerate_configurations
from roadmapper.parser import load_file, parse

REPO_ROOT = Path(__file__).resolve().parent.parent
LAS_PATH = REPO_ROOT / "models" / "las.req"
SCHEMA_PATH = REPO_ROOT / "schemas" / "output.schema.json"


def parse_ok(text: str):
    result = parse(text)
    assert result.ok, [str(d) for d in result.diagnostics]
    return result.database


@pytest.fixture(scope="session")
def las_db():
    result = load_file(LAS_PATH)
    assert result.ok, [str(d) for d in result.diagnostics]
    return result.database


@pytest.fixture(scope="session")
def las_enumeration(las_db):
    return enumerate_configurations(las_db, max_atoms=64)
