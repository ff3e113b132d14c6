import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from egchain import _backend, presets  # noqa: E402

ACCEPTANCE_RESULTS: dict[str, tuple[bool, str]] = {}

BACKENDS = [_backend.python_kernels]
if _backend.compiled_kernels is not None:
    BACKENDS.insert(0, _backend.compiled_kernels)

PROTOCOLS = [("br", None), ("ppc", None), ("pc", None), ("cap", None),
             ("logit", 0.1), ("logit", 1.0), ("logit", 1000.0)]


@pytest.fixture(params=BACKENDS, ids=lambda k: k.NAME)
def kernels(request):
    return request.param


@pytest.fixture(scope="session")
def ipd():
    return presets.meta_game("ipd")


@pytest.fixture(scope="session")
def rps():
    return presets.meta_game("rps")


@pytest.fixture(scope="session")
def stag_hunt():
    return presets.meta_game("stag_hunt")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS, key=lambda k: int(k.split()[0])):
        ok, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {key}: {detail}")
