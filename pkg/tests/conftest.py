import pathlib

import pytest

from qimp.frontend import parse_source
from qimp.ownership import check_program
from qimp.resolve import resolve_types

ROOT = pathlib.Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus" / "listings"


def corpus_path(name: str) -> pathlib.Path:
    return CORPUS / f"{name}.qimp"


def typed(source: str, file: str = "t.qimp"):
    return resolve_types(parse_source(source, file))


def typed_corpus(name: str):
    path = corpus_path(name)
    return typed(path.read_text(), str(path))


def codes(source: str) -> list[str]:
    return [d.code for d in check_program(typed(source))]


@pytest.fixture
def corpus():
    return CORPUS


# Acceptance criteria record one summary line each; they are repeated at the
# end of the run so they show up even when output capture is on.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
