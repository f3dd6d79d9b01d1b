import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

ACCEPTANCE_LINES = []


def record_criterion(number, passed, detail):
    line = f"CRITERION {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=["compiled", "python"])
def backend(request, monkeypatch):
    """Run a test against each kernel implementation."""
    from bdml import _backend, _pykernels
    import bdml.gel
    import bdml.learners.forest
    import bdml.learners.lasso
    import bdml.posterior

    if request.param == "compiled":
        if _backend.BACKEND != "compiled":
            pytest.skip("compiled extension not built")
        mod = _backend.kernels
    else:
        mod = _pykernels
    for module in (bdml.gel, bdml.posterior, bdml.learners.forest, bdml.learners.lasso):
        monkeypatch.setattr(module, "kernels", mod)
    return request.param
