from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from srgsearch.engine import CaseContext  # noqa: E402
from srgsearch.runner import freeze, load_frozen, reproduce_counts  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def reproduction():
    return reproduce_counts(strict=True)


@pytest.fixture(scope="session")
def goods(reproduction):
    return reproduction.goods


@pytest.fixture(scope="session")
def segments(reproduction):
    return reproduction.segments


@pytest.fixture(scope="session")
def pairs(reproduction):
    return {p.case_id: p for p in reproduction.pairs}


@pytest.fixture(scope="session")
def ctx(segments):
    return CaseContext(segments)


@pytest.fixture(scope="session")
def frozen_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("frozen")
    freeze(out)
    return out


@pytest.fixture(scope="session")
def manifest(frozen_dir):
    return frozen_dir / "manifest.jsonl"


@pytest.fixture(scope="session")
def frozen(manifest):
    return load_frozen(manifest)


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per criterion; echoed now and in the terminal summary."""

    def record(number: int, ok: bool, detail: str) -> None:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
