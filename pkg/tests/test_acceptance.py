"""One test per acceptance criterion, each at its stated tolerance.

Run ``pytest tests/test_acceptance.py`` for a pass/fail line per criterion in the
terminal summary, or ``python tests/test_acceptance.py`` for the same lines on
stdout.
"""

import sys
import time

import pytest

from sigma_forge.suites import GROUPS, RunOptions, run_group

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # run as a script from elsewhere
    ACCEPTANCE_LINES = []

TITLES = {
    1: "weighted sigma recursion vs shift formula and generating function",
    2: "weighted Newton inequality and equality families",
    3: "Newton transformation identities and ellipticity",
    4: "flat conservation laws",
    5: "self-adjointness and the curved obstruction",
    6: "soliton closed forms",
    7: "scale invariance",
    8: "gradients vs finite differences",
    9: "second variations at solitons",
    10: "spectral gap of the Gaussian",
    11: "contraction identity and cone bracket sign",
}

# wall-clock budgets, seconds
BUDGETS = {1: 10.0, 2: 30.0, 9: 120.0}


def evaluate_criterion(number):
    start = time.perf_counter()
    records = run_group(number, RunOptions(seed=0))
    elapsed = time.perf_counter() - start
    failed = [r for r in records if not r.passed]
    budget = BUDGETS.get(number)
    slow = budget is not None and elapsed > budget
    ok = bool(records) and not failed and not slow
    detail = f"{len(records) - len(failed)}/{len(records)} checks, {elapsed:.1f}s"
    if budget is not None:
        detail += f" (budget {budget:.0f}s)"
    line = f"AC{number} {'PASS' if ok else 'FAIL'} {TITLES[number]}: {detail}"
    return ok, line, failed, slow


@pytest.mark.slow
@pytest.mark.parametrize("number", sorted(GROUPS))
def test_criterion(number):
    ok, line, failed, slow = evaluate_criterion(number)
    ACCEPTANCE_LINES.append(line)
    print(line)
    msgs = [f"{r.check_id}: residual {r.residual:.3e} > tol {r.tol:.3e}" for r in failed[:10]]
    if slow:
        msgs.append("runtime budget exceeded")
    assert ok, "; ".join(msgs)


if __name__ == "__main__":
    results = [evaluate_criterion(n) for n in sorted(GROUPS)]
    for _, line, _, _ in results:
        print(line)
    sys.exit(0 if all(r[0] for r in results) else 1)
