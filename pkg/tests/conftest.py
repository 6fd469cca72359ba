import time

import pytest

from wardlab.experiments import run_lowerbound, run_suite

# criterion number -> (passed, one-line detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}

TITLES = {
    1: "lower-bound reproduction",
    2: "phase forcing",
    3: "2-approximation suite",
    4: "optimal-recovery suite",
    5: "1-D suite",
    6: "monotonicity and telescoping",
    7: "engine equivalence",
    8: "cost-algebra laws",
    9: "certifier consistency",
    10: "k-median non-monotonicity",
}


@pytest.fixture
def record():
    def _record(criterion: int, ok: bool, detail: str):
        ACCEPTANCE[criterion] = (bool(ok), detail)

    return _record


def _timed(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - t0


@pytest.fixture(scope="session")
def lowerbound_run():
    return _timed(run_lowerbound, 2, 8)


@pytest.fixture(scope="session")
def twoapprox_run():
    return _timed(run_suite, "separated-2approx", 50, 0)


@pytest.fixture(scope="session")
def recovery_run():
    return _timed(run_suite, "separated-recovery", 50, 0)


@pytest.fixture(scope="session")
def oned_run():
    return _timed(run_suite, "oned", 100, 0)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for c in sorted(TITLES):
        if c not in ACCEPTANCE:
            terminalreporter.write_line(f"NOT RUN  criterion {c:2d} ({TITLES[c]})")
            continue
        ok, detail = ACCEPTANCE[c]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}     criterion {c:2d} ({TITLES[c]}): {detail}")
