from __future__ import annotations

import json
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"
SPEC_FILES = sorted((FIXTURES / "specs").glob("*.json"))
BAD_SPEC_FILES = sorted((FIXTURES / "bad").glob("*.json"))

# acceptance lines, filled by tests/test_acceptance.py
ACCEPTANCE: dict[int, str] = {}


def load_spec_json(name: str) -> dict:
    return json.loads((FIXTURES / "specs" / f"{name}.json").read_text())


def global_fixture_names() -> list[str]:
    out = []
    for path in SPEC_FILES:
        data = json.loads(path.read_text())
        if isinstance(data["conductor"], int):
            out.append(path.stem)
    return out


@pytest.fixture
def spec_json():
    return load_spec_json


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
