import os
import sys

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def natural_images():
    """Ten bundled natural photographs, normalized to the pipeline size."""
    data = pytest.importorskip("skimage.data")
    from houghface.imageops import normalize_input

    names = ["camera", "astronaut", "coffee", "chelsea", "coins",
             "moon", "page", "text", "rocket", "clock"]
    return {n: normalize_input(getattr(data, n)()) for n in names}


_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[rep.outcome]
        detail = ""
        if rep.skipped and isinstance(rep.longrepr, tuple):
            detail = rep.longrepr[2]
        _CRITERIA[number] = (title, status, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(_CRITERIA):
        title, status, detail = _CRITERIA[number]
        line = f"criterion {number:>2}: {status:<4} {title}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)
