"""Release gate: every builtin-corpus criterion at its stated tolerance.

Runs the same checks as `ruledkit selftest` on the default 200-sample
grids and asserts them criterion by criterion, printing one line per
check. Expected wall time is well under a minute.
"""

import pytest

from ruledkit.selftest import CheckResult, run_selftest

CRITERIA = {
    1: "degree profiles (cylinder 0; helicoid/cone/tangent developable 1; "
       "two-rotation family 2; bound d <= min(m-1, n+1))",
    2: "striction recovery (cone apex, helicoid axis, developable edge)",
    3: "striction system symmetric positive definite and equal to the "
       "trailing rho Gram matrix",
    4: "singularities confined to the striction sheet",
    5: "wedge / stability / flatness verdicts identical; helicoid curvature",
    6: "first normal space dimension within [d-1, d+1]",
    7: "striction sheet independent of the directrix",
    8: "classification labels and the singularity converse",
    9: "derivative hygiene and the rotating-frame cylinder",
}


@pytest.fixture(scope="module")
def results() -> list[CheckResult]:
    return run_selftest(seed=0, t_samples=200)


@pytest.mark.parametrize("criterion", sorted(CRITERIA))
def test_acceptance_criterion(results, criterion):
    relevant = [r for r in results if r.criterion == criterion]
    assert relevant, f"criterion {criterion} produced no checks"
    for r in relevant:
        print(r.line())
    failed = [r for r in relevant if not r.passed]
    assert not failed, f"criterion {criterion} ({CRITERIA[criterion]}): " \
                       f"{[r.name for r in failed]}"


def test_acceptance_summary(results):
    n_pass = sum(r.passed for r in results)
    print(f"\nacceptance: {n_pass}/{len(results)} checks passed")
    assert n_pass == len(results)
