import os
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=500, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

DATA = Path(__file__).parent / "data"
CASE4 = sorted((DATA / "case4").glob("*.txt"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def suite():
    from specrecon.pipeline import suite_curves

    return suite_curves()


@pytest.fixture(scope="session")
def suite_results(suite):
    """Default pipeline over the 700-curve synthetic suite, computed once."""
    from specrecon.pipeline import run_curve

    return [run_curve(s.curve, smooth=s.smooth) for s in suite]


def pytest_terminal_summary(terminalreporter):
    acc = sys.modules.get("test_acceptance")
    lines = [acc.SUMMARY[k] for k in sorted(acc.SUMMARY)] if acc else []
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
