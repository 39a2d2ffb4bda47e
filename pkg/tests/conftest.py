import pytest

from rebo.kinematics import RigConfig

ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def rig35():
    """The paper's length cube with d fixed at 35 mm (used by the hand-worked examples)."""
    return RigConfig(d=35.0, l_max=88.0, l_min=66.0, r_p=10.0, tau_c=0.2277, k_single=1035.0)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
