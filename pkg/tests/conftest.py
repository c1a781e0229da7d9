import json
from pathlib import Path

import pytest

from xlangperm.corpus import load_corpus
from xlangperm.pipeline import extract_from_corpus

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
PARTS = FIXTURES / "parts"
APPS = FIXTURES / "apps"
PERMDB = FIXTURES / "permdb.json"
CORPORA = json.loads((FIXTURES / "corpora.json").read_text())


def corpus_roots(name):
    return [PARTS / p for p in CORPORA[name]]


def load_named(name):
    return load_corpus(corpus_roots(name))


_extractions = {}


def extraction(name):
    """Cached extraction of a named fixture corpus (results are immutable)."""
    if name not in _extractions:
        _extractions[name] = extract_from_corpus(load_named(name))
    return _extractions[name]


@pytest.fixture
def full_map():
    return extraction("full_corpus").map


# -- acceptance summary ------------------------------------------------------

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, label): acceptance criterion, summarized at session end")


def pytest_runtest_logreport(report):
    marker = getattr(report, "criterion", None)
    if marker is None:
        return
    number, label = marker
    failed = report.failed or (report.when == "call" and report.skipped)
    prev = _criteria.get(number, (label, True))
    _criteria[number] = (label, prev[1] and not failed)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        outcome.get_result().criterion = tuple(marker.args)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        label, ok = _criteria[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {label}")
