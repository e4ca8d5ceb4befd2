import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import CRITERIA, MODELS, iv_graph_cbn  # noqa: E402


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok, detail in sorted(CRITERIA):
        terminalreporter.write_line(f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}  {detail}")


@pytest.fixture
def iv_cbn():
    return iv_graph_cbn()


@pytest.fixture
def iv_cbn_regime():
    return iv_graph_cbn(regime=True)


@pytest.fixture
def models_dir():
    return MODELS
