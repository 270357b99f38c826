import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def small_cohort():
    from screenkit.synthetic import SyntheticSpec, generate_synthetic
    return generate_synthetic(SyntheticSpec(n_rows=1500, seed=11))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one line per acceptance criterion, printed after the run
ACCEPTANCE: dict[str, str] = {}


@pytest.fixture
def acceptance():
    def record(criterion: str, ok: bool | None, detail: str) -> None:
        status = "SKIP" if ok is None else "PASS" if ok else "FAIL"
        line = f"{criterion} {status}  {detail}"
        ACCEPTANCE[criterion] = line
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
