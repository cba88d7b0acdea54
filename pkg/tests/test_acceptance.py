"""Acceptance gate: criteria 1-11 at their stated tolerances.

Run under pytest (the summary lists one line per criterion) or directly with
``python tests/test_acceptance.py``.
"""

import time

import pytest

from hooke_billiard.sampling import DEFAULT_SEED
from hooke_billiard.verification import run_verification

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # run as a script
    ACCEPTANCE_LINES = []

TIME_BUDGET = 60.0
CRITERIA = range(1, 11)


def timed_run():
    t0 = time.perf_counter()
    report = run_verification(DEFAULT_SEED)
    return report, time.perf_counter() - t0


@pytest.fixture(scope="module")
def full_run():
    return timed_run()


def record(criterion: int, passed: bool, text: str) -> None:
    line = f"criterion {criterion:>2}: {'PASS' if passed else 'FAIL'}  {text}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def summarise(report, criterion: int) -> tuple[bool, str]:
    results = [r for r in report.results if r.criterion == criterion]
    assert results, f"no check registered for criterion {criterion}"
    passed = all(r.passed for r in results)
    text = "; ".join(f"{r.key} worst={r.worst:.3e} tol={r.tolerance:.1e} n={r.samples}" for r in results)
    return passed, text


@pytest.mark.parametrize("criterion", CRITERIA)
def test_criterion(full_run, criterion):
    report, _ = full_run
    passed, text = summarise(report, criterion)
    record(criterion, passed, text)
    assert passed, text


def test_criterion_11_budget_and_determinism(full_run):
    first, elapsed = full_run
    second, _ = timed_run()
    same = first.render() == second.render() and first.to_json() == second.to_json()
    passed = elapsed <= TIME_BUDGET and same
    record(11, passed, f"wall={elapsed:.1f}s budget={TIME_BUDGET:.0f}s deterministic={same}")
    assert same
    assert elapsed <= TIME_BUDGET


if __name__ == "__main__":
    report, elapsed = timed_run()
    for c in CRITERIA:
        record(c, *summarise(report, c))
    again, _ = timed_run()
    record(11, elapsed <= TIME_BUDGET and report.render() == again.render(),
           f"wall={elapsed:.1f}s budget={TIME_BUDGET:.0f}s")
