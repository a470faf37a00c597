import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from paclab.channels import ebn0_to_esn0
from paclab.cutoff import bit_channel_table
from paclab.fano import make_bias
from paclab.profiler import design_pac_code

settings.register_profile(
    "paclab", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("paclab")


@pytest.fixture(scope="session")
def pac128():
    """A PAC(128, 85) design from modest MC budgets, shared by the unit tests."""
    return design_pac_code(128, 85, 99, 4, 3.0, trials=200_000, bit_trials=20_000, seed=11).spec


@pytest.fixture(scope="session")
def pac128_bias(pac128):
    """Per-bit cutoff-rate bias for ``pac128`` at 3.0 dB."""
    es = ebn0_to_esn0(3.0, pac128.rate)
    return make_bias(pac128, bit_channel_table(pac128.n, es, 20_000, seed=3).r0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    verdict = "PASS" if report.passed else "FAIL"
    line = f"criterion {props['criterion']}: {verdict}"
    if props.get("detail"):
        line += f" | {props['detail']}"
    _ACCEPTANCE_LINES.append(line)


_ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
