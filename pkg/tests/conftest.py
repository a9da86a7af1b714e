import pytest

CRITERIA = {
    1: "convergence orders",
    2: "symplectic energy",
    3: "isospectral Lax flow",
    4: "spectral ground truth",
    5: "exact-soliton oracle",
    6: "metric unit suite",
    7: "qualitative rankings (T=200)",
    8: "PureS over-optimism",
    9: "desk-scale benchmark harness",
}

_LOG = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_LOG] = {}


@pytest.fixture
def criterion(request):
    """Record a pass/fail line for an acceptance criterion, then assert it."""
    log = request.config.stash[_LOG]

    def report(number: int, ok: bool, detail: str) -> None:
        log[number] = (bool(ok), detail)
        assert ok, f"criterion {number} ({CRITERIA[number]}): {detail}"

    return report


def pytest_terminal_summary(terminalreporter, config):
    log = config.stash.get(_LOG, {})
    if not log:
        return
    terminalreporter.section("acceptance criteria")
    for number, name in CRITERIA.items():
        if number in log:
            ok, detail = log[number]
            terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {number}. {name}: {detail}")
        else:
            terminalreporter.write_line(f"[----] {number}. {name}: not run or errored")
