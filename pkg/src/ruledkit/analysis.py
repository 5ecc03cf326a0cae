"""End-to-end analysis of an ingested patch, and its file outputs.

Runs the degree profile, classification, developability residuals,
first-normal-space bounds, per-segment striction solves with the
singularity scan, and the shifted-directrix invariance check, then
writes report.json, striction CSVs, an OBJ mesh for 3-D surfaces, and
the normalized scene.
"""

from __future__ import annotations

import os
from importlib.metadata import version

import numpy as np

from .classify import classify_patch
from .distribution import constant_degree_segments, degree_profile, pivot_frame
from .errors import NumericError
from .exports import write_json, write_mesh_obj
from .multilinear import TolerancePolicy
from .ruledgeom import RuledPatch, first_normal_bounds_check, rank_one_check
from .scene import IngestResult, normalized_scene_bytes
from .striction import (StrictionSheet, directrix_invariance,
                        equivalent_condition_check, singular_locus,
                        solve_striction, striction_jacobian_rank,
                        write_striction_csv)

DEFAULT_INVARIANCE_SCALES = (0.5, 1.0, -0.7)


def _tol_dict(tol: TolerancePolicy) -> dict:
    return {"rank_rel_tol": tol.rank_rel_tol, "zero_abs_tol": tol.zero_abs_tol,
            "derivative_check_tol": tol.derivative_check_tol}


def _analyze_segment_striction(patch: RuledPatch, d: int, seed: int):
    """Pivot + solve + scan one constant-degree segment; returns
    (sheet, pivoted patch, report section)."""
    pivoted = pivot_frame(patch.fc, patch.grid, d, patch.tol)
    pp = RuledPatch(pivoted, patch.grid, patch.tol)
    sheet = solve_striction(pp, d)
    locus = singular_locus(pp, sheet, seed=seed)
    eq = equivalent_condition_check(pp, sheet)
    ranks = set()
    for t in patch.grid.t_samples:
        for u in patch.grid.u_points(sheet.free_count):
            ranks.add(striction_jacobian_rank(sheet, t, u, patch.tol))
    section = {
        "t_range": [float(patch.grid.t_samples[0]), float(patch.grid.t_samples[-1])],
        "degree": d,
        "sheet_dimension": sheet.free_count + 1,
        "max_defining_residual": sheet.max_defining_residual,
        "solve_fallback_t": [float(t) for t in sheet.fallback_ts],
        "singular_fraction": locus.singular_fraction,
        "offsheet": {"total": locus.offsheet_total, "regular": locus.offsheet_regular},
        "equivalent_condition": {"all_agree": eq.all_agree,
                                 "skipped_t": list(eq.skipped)},
        "jacobian_rank_range": [min(ranks), max(ranks)],
    }
    return sheet, pp, locus, section


def analyze(result: IngestResult, out_dir, seed: int = 0,
            invariance: bool = True) -> dict:
    """Run the full pipeline and write all outputs into `out_dir`.

    Returns the report dictionary (the same content as report.json).
    """
    patch = result.patch
    fc, grid, tol = patch.fc, patch.grid, patch.tol
    os.makedirs(out_dir, exist_ok=True)
    notes = list(result.notes)

    profile = degree_profile(fc, grid, tol)
    classification = classify_patch(patch, seed=seed)
    r1 = rank_one_check(patch)

    bounds_sections = []
    striction_sections = []
    csv_names = []
    full_sheet: StrictionSheet | None = None
    full_pivoted: RuledPatch | None = None
    segments = constant_degree_segments(profile)
    for k, (i0, i1, d) in enumerate(segments):
        if i1 - i0 < 3:
            notes.append(f"segment {k} too narrow to analyze "
                         f"({i1 - i0} samples at degree {d})")
            continue
        sub = RuledPatch(fc, grid.restrict(i0, i1), tol)
        bounds = first_normal_bounds_check(sub, d)
        bounds_sections.append({
            "t_range": [float(sub.grid.t_samples[0]), float(sub.grid.t_samples[-1])],
            "degree": d,
            "checked": len(bounds.entries),
            "skipped_singular": bounds.skipped_singular,
            "violations": [[t, u, dim] for t, u, dim, _ in bounds.violations],
        })
        if d == 0:
            continue
        try:
            sheet, pp, locus, section = _analyze_segment_striction(sub, d, seed)
        except NumericError as exc:
            notes.append(f"striction unavailable on segment {k}: {exc}")
            continue
        name = "striction.csv" if len(segments) == 1 else f"striction_seg{k}.csv"
        write_striction_csv(sheet, locus, os.path.join(out_dir, name))
        csv_names.append(name)
        section["csv"] = name
        striction_sections.append(section)
        if len(segments) == 1:
            full_sheet = sheet
            full_pivoted = pp

    invariance_section = None
    if invariance and full_sheet is not None:
        offsets = [np.full(fc.m - 1, s) for s in DEFAULT_INVARIANCE_SCALES]
        inv = directrix_invariance(full_pivoted, full_sheet, offsets)
        invariance_section = {
            "offsets": [o.tolist() for o in offsets],
            "per_offset": [[c, dev] for c, dev in inv.per_offset],
            "skipped": [[c, reason] for c, reason in inv.skipped],
            "max_deviation": inv.max_deviation,
        }

    mesh_name = None
    if fc.dim == 3 and fc.m == 2:
        mesh_name = "mesh.obj"
        write_mesh_obj(os.path.join(out_dir, mesh_name), patch, full_sheet)

    report = {
        "schema": "ruledkit.report/v1",
        "generator": f"ruledkit {version('ruledkit')}",
        "scene": result.normalized,
        "notes": notes,
        "ambient_dim": fc.dim,
        "m": fc.m,
        "codim": fc.codim,
        "grid": {"t_samples": int(grid.t_samples.size), "u_extent": grid.u_extent,
                 "u_samples_per_axis": grid.u_samples_per_axis,
                 "interval": [float(fc.interval[0]), float(fc.interval[1])]},
        "tolerances": _tol_dict(tol),
        "seed": seed,
        "degree_profile": {
            "t": [float(t) for t in grid.t_samples],
            "degree": [int(d) for d in profile.degrees],
            "constant_degree": profile.constant_degree,
            "cylindrical": profile.cylindrical,
            "noncylindrical": profile.noncylindrical,
            "borderline_t": list(profile.borderline_t),
        },
        "classification": classification.to_dict(),
        "rank_one": {
            "verdict": r1.verdict,
            "max_residual": r1.max_residual,
            "planar_points": [[t, u] for t, u in r1.planar],
            "residual_table": [[t, r] for t, r in r1.residual_table],
        },
        "first_normal_bounds": bounds_sections,
        "striction": striction_sections,
        "directrix_invariance": invariance_section,
        "outputs": {"mesh": mesh_name, "striction_csv": csv_names},
    }
    write_json(os.path.join(out_dir, "report.json"), report)
    with open(os.path.join(out_dir, "normalized_scene.json"), "wb") as fh:
        fh.write(normalized_scene_bytes(result.normalized))
    return report
