import os
from importlib.resources import files
from pathlib import Path

import pytest

from topnlidb.lexgram import load_lexicon
from topnlidb.tdb import load_database

DATA = files("topnlidb") / "data"
GOLDEN = Path(__file__).parent / "golden"
UPDATE_GOLDEN = os.environ.get("TOPNLIDB_UPDATE_GOLDEN") == "1"


def data_path(name: str) -> str:
    return str(DATA / name)


@pytest.fixture(scope="session")
def sample_lexicon():
    return load_lexicon((DATA / "sample.lex").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def sample_db():
    return load_database((DATA / "sample.tdb").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def clock_db():
    return load_database((DATA / "clock.tdb").read_text(encoding="utf-8"))


def check_golden(name: str, text: str):
    path = GOLDEN / name
    if UPDATE_GOLDEN or not path.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    assert text == path.read_text(encoding="utf-8"), f"output differs from {path}"


CRITERIA = {
    1: "example formula corpus reproduced by analyze()",
    2: "imperfective paradox answers",
    3: "dual-path equivalence on random (database, formula) pairs",
    4: "homogeneity of atomic formulae",
    5: "?mxl answers are maximal",
    6: "Perf resets the localisation window",
    7: "Culm cancellation under for-adverbials",
    8: "batch output is deterministic",
}
_outcomes: dict[int, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    n = int(report.nodeid.split("test_criterion_")[1].split("_")[0])
    detail = dict(report.user_properties).get("detail", "")
    if report.when == "call" or report.outcome != "passed":
        status = "PASS" if report.outcome == "passed" else "FAIL"
        if n not in _outcomes or status == "FAIL":
            _outcomes[n] = (status, detail)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n, text in CRITERIA.items():
        if n in _outcomes:
            status, detail = _outcomes[n]
            terminalreporter.write_line(
                f"criterion {n}: {status}  {text}" + (f" ({detail})" if detail else ""))
