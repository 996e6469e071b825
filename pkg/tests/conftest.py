import sys

import numpy as np
import pytest

from odba_chain.chain import ModelParams


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def small_params():
    return ModelParams(4, 1.0, 0.3, 1)



def pytest_terminal_summary(terminalreporter):
    # repeat the acceptance lines so they survive output capture
    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
