"""Built-in verification corpus.

Runs every release-gate check against the builtin patch families at
their stated tolerances and reports one line per criterion group. The
pytest acceptance module asserts exactly these results, so `ruledkit
selftest` reproduces the test gate from the shell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classify import (CONICAL, CYLINDRICAL, NON_RANK_ONE, TANGENT,
                       classify_patch, converse_check)
from .distribution import degree_profile, pivot_frame, rho_at
from .errors import RuledKitError
from .multilinear import TolerancePolicy
from .oracles import max_derivative_error
from .parametric import SampleGrid, make_builtin_patch
from .ruledgeom import (RuledPatch, first_normal_bounds_check, flatness_check,
                        rank_one_check, jacobian_sigma, sectional_curvature,
                        tangent_space_stability)
from .striction import (assemble_system, directrix_invariance, singular_locus,
                        solve_striction)

CORPUS_DEGREES = {
    "cylinder_helix": 0,
    "rotating_cylinder": 0,
    "helicoid_frame": 1,
    "circular_cone": 1,
    "tangent_developable_helix": 1,
    "tangent_developable_product": 1,
    "two_rotation_r5": 2,
}

EXPECTED_KINDS = {
    "cylinder_helix": CYLINDRICAL,
    "rotating_cylinder": CYLINDRICAL,
    "helicoid_frame": NON_RANK_ONE,
    "circular_cone": CONICAL,
    "tangent_developable_helix": TANGENT,
    "tangent_developable_product": TANGENT,
    "two_rotation_r5": NON_RANK_ONE,
}

#: patches without planar points, where the three developability
#: characterizations must agree
EQUIVALENCE_PATCHES = [
    "cylinder_helix", "helicoid_frame", "circular_cone",
    "tangent_developable_helix", "tangent_developable_product", "two_rotation_r5",
]

DEGREE_ONE_PATCHES = [
    "helicoid_frame", "circular_cone", "tangent_developable_helix",
    "tangent_developable_product",
]

FLATNESS_TOL = 1e-6
INVARIANCE_OFFSET_SCALES = (0.5, 1.0, -0.7)


@dataclass(frozen=True)
class CheckResult:
    criterion: int
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        detail = f"  [{self.detail}]" if self.detail else ""
        return f"[{status}] criterion {self.criterion}: {self.name}{detail}"


def build_corpus(tol: TolerancePolicy, t_samples: int = 200) -> dict[str, RuledPatch]:
    patches = {}
    for name in CORPUS_DEGREES:
        fc = make_builtin_patch(name)
        grid = SampleGrid.uniform(fc.interval, t_samples)
        patches[name] = RuledPatch(fc, grid, tol)
    return patches


def _regularity_margin(p: RuledPatch, t: float, u) -> float:
    s = np.linalg.svd(jacobian_sigma(p, t, u), compute_uv=False)
    return float(s[-1] / s[0]) if s[0] > 0 else 0.0


def _stability_sweep(p: RuledPatch, pairs_per_t: int, seed: int) -> bool:
    """Tangent-space stability over random regular ruling pairs at each t."""
    rng = np.random.default_rng(seed)
    ext = p.grid.u_extent
    for t in p.grid.t_samples:
        pairs = []
        attempts = 0
        while len(pairs) < pairs_per_t and attempts < 50 * pairs_per_t:
            attempts += 1
            ua = rng.uniform(-ext, ext, p.m - 1)
            ub = rng.uniform(-ext, ext, p.m - 1)
            if min(_regularity_margin(p, t, ua), _regularity_margin(p, t, ub)) < 1e-3:
                continue
            pairs.append((ua, ub))
        if not tangent_space_stability(p, t, pairs):
            return False
    return True


def _solved_sheet(p: RuledPatch, d: int, seed: int):
    pivoted = pivot_frame(p.fc, p.grid, d, p.tol)
    pp = RuledPatch(pivoted, p.grid, p.tol)
    sheet = solve_striction(pp, d)
    locus = singular_locus(pp, sheet, seed=seed)
    return pp, sheet, locus


def run_selftest(tol: TolerancePolicy | None = None, seed: int = 0,
                 t_samples: int = 200) -> list[CheckResult]:
    """Run every acceptance criterion; one result per named check."""
    tol = tol or TolerancePolicy()
    results: list[CheckResult] = []

    def record(criterion, name, passed, detail=""):
        results.append(CheckResult(criterion, name, bool(passed), detail))

    def guarded(criterion, name, fn):
        try:
            fn()
        except RuledKitError as exc:
            record(criterion, name, False, f"{type(exc).__name__}: {exc}")
        except Exception as exc:  # a crash is a failure, not an abort
            record(criterion, name, False, f"unexpected {type(exc).__name__}: {exc}")

    patches = build_corpus(tol, t_samples)
    sheets: dict[str, tuple] = {}

    # -- criterion 1: degree profiles and the degree bound -----------------
    def c1():
        for name, expected in CORPUS_DEGREES.items():
            p = patches[name]
            prof = degree_profile(p.fc, p.grid, tol)
            bound = min(p.m - 1, p.fc.codim + 1)
            ok = (prof.constant_degree == expected
                  and all(d <= bound for d in prof.degrees))
            record(1, f"degree profile {name}", ok,
                   f"degree={prof.constant_degree} expected={expected} bound={bound}")
    guarded(1, "degree profiles", c1)

    # -- criterion 2: striction recovery ------------------------------------
    def c2():
        sqrt2 = math.sqrt(2.0)
        pp, sheet, locus = _solved_sheet(patches["circular_cone"], 1, seed)
        sheets["circular_cone"] = (pp, sheet, locus)
        ts = pp.grid.t_samples
        u_err = max(abs(float(sheet.solved(t)[0]) + sqrt2) for t in ts)
        apex_err = max(float(np.linalg.norm(sheet.beta(t))) for t in ts)
        record(2, "cone solved coordinate -sqrt(2)", u_err < 1e-8, f"max err {u_err:.2e}")
        record(2, "cone apex at origin", apex_err < 1e-6, f"max |beta| {apex_err:.2e}")

        pp, sheet, locus = _solved_sheet(patches["helicoid_frame"], 1, seed)
        sheets["helicoid_frame"] = (pp, sheet, locus)
        axis_err = max(float(np.linalg.norm(sheet.beta(t)[:2])) for t in pp.grid.t_samples)
        record(2, "helicoid striction line is the axis", axis_err < 1e-8,
               f"max off-axis {axis_err:.2e}")

        pp, sheet, locus = _solved_sheet(patches["tangent_developable_helix"], 1, seed)
        sheets["tangent_developable_helix"] = (pp, sheet, locus)
        ts = pp.grid.t_samples
        u_err = max(abs(float(sheet.solved(t)[0])) for t in ts)
        curve_err = max(float(np.linalg.norm(sheet.beta(t) - pp.fc.directrix.eval(t, 0)))
                        for t in ts)
        record(2, "tangent developable sheet is the directrix",
               u_err < 1e-8 and curve_err < 1e-6,
               f"max |u| {u_err:.2e}, max |beta-curve| {curve_err:.2e}")
    guarded(2, "striction recovery", c2)

    # -- criterion 3: striction system structure ----------------------------
    def c3():
        for name in ["helicoid_frame", "circular_cone", "tangent_developable_helix",
                     "tangent_developable_product", "two_rotation_r5"]:
            p = patches[name]
            d = CORPUS_DEGREES[name]
            pivoted = pivot_frame(p.fc, p.grid, d, tol)
            worst_sym = worst_gram = 0.0
            pd_ok = True
            for t in p.grid.t_samples:
                sys = assemble_system(pivoted, t, d, tol)
                worst_sym = max(worst_sym, float(np.abs(sys.A - sys.A.T).max()))
                pd_ok = pd_ok and float(np.linalg.eigvalsh(sys.A).min()) > 0.0
                rho = rho_at(pivoted, t, tol).rho_vectors[pivoted.m - 1 - d:]
                worst_gram = max(worst_gram, float(np.abs(sys.A - rho @ rho.T).max()))
            ok = worst_sym <= 1e-10 and worst_gram <= 1e-10 and pd_ok
            record(3, f"striction system structure {name}", ok,
                   f"sym {worst_sym:.2e}, gram {worst_gram:.2e}, pd {pd_ok}")
    guarded(3, "striction system structure", c3)

    # -- criterion 4: singularity localization ------------------------------
    def c4():
        for name in ["circular_cone", "tangent_developable_helix",
                     "tangent_developable_product"]:
            if name not in sheets:
                sheets[name] = _solved_sheet(patches[name], 1, seed)
            _, _, locus = sheets[name]
            ok = locus.singular_fraction >= 0.99 and locus.offsheet_all_regular
            record(4, f"singularities confined to the sheet: {name}", ok,
                   f"coverage {locus.singular_fraction:.3f}, "
                   f"off-sheet regular {locus.offsheet_regular}/{locus.offsheet_total}")
        _, _, locus = sheets["helicoid_frame"]
        record(4, "helicoid sheet has no singular samples",
               locus.singular_fraction == 0.0,
               f"fraction {locus.singular_fraction:.3f}")
    guarded(4, "singularity localization", c4)

    # -- criterion 5: developability characterizations agree ----------------
    def c5():
        for name in EQUIVALENCE_PATCHES:
            p = patches[name]
            wedge_verdict = rank_one_check(p).verdict
            flat_verdict = flatness_check(p).is_flat(FLATNESS_TOL)
            stable_verdict = _stability_sweep(p, pairs_per_t=10, seed=seed)
            ok = wedge_verdict == flat_verdict == stable_verdict
            record(5, f"characterizations agree: {name}", ok,
                   f"wedge={wedge_verdict} flat={flat_verdict} stable={stable_verdict}")
        k = sectional_curvature(patches["helicoid_frame"], 0.0, [0.0])
        record(5, "helicoid curvature at the axis", abs(k + 1.0) < 1e-6, f"K={k!r}")
    guarded(5, "developability characterizations", c5)

    # -- criterion 6: first normal space bounds -----------------------------
    def c6():
        for name, d in CORPUS_DEGREES.items():
            report = first_normal_bounds_check(patches[name], d)
            record(6, f"first normal bounds {name}", report.ok,
                   f"checked {len(report.entries)}, violations {len(report.violations)}")
    guarded(6, "first normal bounds", c6)

    # -- criterion 7: directrix invariance ----------------------------------
    def c7():
        for name in ["circular_cone", "tangent_developable_helix"]:
            pp, sheet, _ = sheets[name]
            offsets = [np.full(pp.m - 1, s) for s in INVARIANCE_OFFSET_SCALES]
            inv = directrix_invariance(pp, sheet, offsets)
            ok = inv.max_deviation < 1e-6 and not inv.skipped
            record(7, f"directrix invariance {name}", ok,
                   f"max deviation {inv.max_deviation:.2e}")
    guarded(7, "directrix invariance", c7)

    # -- criterion 8: classification ----------------------------------------
    def c8():
        for name, expected in EXPECTED_KINDS.items():
            rep = classify_patch(patches[name], seed=seed)
            kinds = rep.kinds()
            ok = kinds == [expected]
            detail = f"kinds={kinds} expected=[{expected}]"
            if name == "tangent_developable_product" and ok:
                if name not in sheets:
                    sheets[name] = _solved_sheet(patches[name], 1, seed)
                _, sheet, _ = sheets[name]
                ok = sheet.free_count + 1 == 2
                detail += f", sheet dimension {sheet.free_count + 1}"
            record(8, f"classification {name}", ok, detail)
        for name in DEGREE_ONE_PATCHES:
            cv = converse_check(patches[name], seed=seed)
            record(8, f"singularity/developability converse {name}", cv.agree,
                   f"rank_one={cv.rank_one} coverage={cv.singular_coverage:.3f}")
    guarded(8, "classification", c8)

    # -- criterion 9: numerical hygiene --------------------------------------
    def c9():
        for name, p in patches.items():
            fields = [p.fc.directrix, *p.fc.frame]
            worst = 0.0
            for f in fields:
                for order in (1, 2):
                    worst = max(worst, max_derivative_error(
                        f, p.fc.interval, order, n=50, seed=seed))
            record(9, f"analytic vs finite-difference derivatives {name}",
                   worst < 1e-7, f"max err {worst:.2e}")
        rep = classify_patch(patches["rotating_cylinder"], seed=seed)
        record(9, "rotating-frame cylinder classified cylindrical",
               rep.kinds() == [CYLINDRICAL], f"kinds={rep.kinds()}")
    guarded(9, "numerical hygiene", c9)

    return results


def format_results(results: list[CheckResult]) -> str:
    lines = [r.line() for r in results]
    n_pass = sum(r.passed for r in results)
    lines.append(f"{n_pass}/{len(results)} checks passed")
    return "\n".join(lines)


def all_passed(results: list[CheckResult]) -> bool:
    return all(r.passed for r in results)
