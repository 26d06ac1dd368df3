import pytest

from tendon_hand.hand_model import default_hand_spec


@pytest.fixture(scope="session")
def spec():
    return default_hand_spec()


@pytest.fixture(scope="session")
def index(spec):
    return spec.chain("index")


@pytest.fixture(scope="session")
def coupling(spec):
    return spec.couplings_for("index")[0]


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    verdicts = getattr(mod, "VERDICTS", None)
    if not verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(verdicts):
        terminalreporter.write_line(verdicts[n])
