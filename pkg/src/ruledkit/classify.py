"""Segment a ruled patch into labeled regions.

The pipeline: degree profile -> maximal constant-degree segments -> per
segment, decide cylindrical (degree 0 or fully planar), tangent/conical
(degree 1, developable, singular along the sheet, split by the sheet
Jacobian rank), or non-rank-one. Samples at verdict changes are excluded
as boundary points; runs narrower than the minimum width stay
undetermined.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distribution import constant_degree_segments, degree_profile, pivot_frame
from .errors import DegeneracyError, PivotError, ValidationError
from .multilinear import TolerancePolicy
from .ruledgeom import RuledPatch, rank_one_check, second_form_scan
from .striction import singular_locus, solve_striction, striction_jacobian_rank

CYLINDRICAL = "cylindrical"
CONICAL = "conical"
TANGENT = "tangent"
NON_RANK_ONE = "non_rank_one"
UNDETERMINED = "undetermined"

#: a kind-run must span at least this many grid steps to become a region
MIN_RUN_STEPS = 4
#: fraction of sheet samples that must be singular to accept the
#: "singular along the striction sheet" hypothesis
SINGULAR_COVERAGE = 0.99


@dataclass(frozen=True, eq=False)
class RegionEvidence:
    degree: int
    max_rank_one_residual: float | None = None
    striction_rank_profile: tuple[int, ...] = ()
    singular_fraction: float | None = None
    planar: bool = False
    apex: tuple[float, ...] | None = None
    notes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "degree": self.degree,
            "max_rank_one_residual": self.max_rank_one_residual,
            "striction_rank_profile": list(self.striction_rank_profile),
            "singular_fraction": self.singular_fraction,
            "planar": self.planar,
            "apex": list(self.apex) if self.apex is not None else None,
            "notes": list(self.notes),
        }


@dataclass(frozen=True, eq=False)
class Region:
    t_range: tuple[float, float]
    kind: str
    evidence: RegionEvidence

    def validate(self, m: int, tol: TolerancePolicy):
        """Consistency of the label with its evidence."""
        ev = self.evidence
        if self.kind == CYLINDRICAL and not (ev.degree == 0 or ev.planar):
            raise ValidationError("cylindrical label requires degree 0 or planarity")
        if self.kind in (CONICAL, TANGENT):
            if ev.degree != 1:
                raise ValidationError(f"{self.kind} label requires degree 1")
            if ev.max_rank_one_residual is None or \
                    ev.max_rank_one_residual >= tol.zero_abs_tol:
                raise ValidationError(f"{self.kind} label requires vanishing "
                                      "developability residuals")
            if ev.singular_fraction is None or ev.singular_fraction < SINGULAR_COVERAGE:
                raise ValidationError(f"{self.kind} label requires a singular sheet")
            want = m - 2 if self.kind == CONICAL else m - 1
            if ev.striction_rank_profile != (want,):
                raise ValidationError(
                    f"{self.kind} label requires sheet rank {want}, "
                    f"got {ev.striction_rank_profile}")

    def to_dict(self) -> dict:
        return {"t_range": [self.t_range[0], self.t_range[1]],
                "kind": self.kind,
                "evidence": self.evidence.to_dict()}


@dataclass(frozen=True, eq=False)
class ClassificationReport:
    regions: tuple[Region, ...]
    boundary_points: tuple[float, ...]
    is_rank_one: bool
    is_cylinder: bool
    degrees: tuple[int, ...]
    borderline_t: tuple[float, ...] = ()

    def kinds(self) -> list[str]:
        return [r.kind for r in self.regions]

    def to_dict(self) -> dict:
        return {
            "regions": [r.to_dict() for r in self.regions],
            "boundary_points": list(self.boundary_points),
            "is_rank_one": self.is_rank_one,
            "is_cylinder": self.is_cylinder,
            "degrees": list(self.degrees),
            "borderline_t": list(self.borderline_t),
        }


def _planar_scan(p: RuledPatch) -> tuple[bool, list]:
    """(all regular samples planar, list of planar samples)."""
    scan, _ = second_form_scan(p)
    planar = [(t, u) for t, u, dim in scan if dim == 0]
    return (bool(scan) and len(planar) == len(scan)), planar


def _rank_runs(verdicts: list[str | None], ts: np.ndarray):
    """Maximal runs of identical non-None verdicts; None samples are boundaries."""
    runs = []
    start = None
    for i, v in enumerate(verdicts + [None]):
        if start is None:
            if v is not None:
                start = i
        elif v != verdicts[start]:
            runs.append((start, i, verdicts[start]))
            start = i if v is not None else None
    boundaries = [float(ts[i]) for i, v in enumerate(verdicts) if v is None]
    return runs, boundaries


def _classify_segment(p: RuledPatch, d: int, seed: int):
    """Regions and boundary samples for one constant-degree segment."""
    ts = p.grid.t_samples
    t_range = (float(ts[0]), float(ts[-1]))
    m = p.m

    planar_all, planar = _planar_scan(p)
    if d == 0:
        notes = ("planar region",) if planar_all else ()
        return [Region(t_range, CYLINDRICAL,
                       RegionEvidence(degree=0, planar=planar_all, notes=notes))], []

    if planar_all:
        return [Region(t_range, CYLINDRICAL,
                       RegionEvidence(degree=d, planar=True,
                                      notes=("planar region swept by a moving "
                                             "frame; treated as cylindrical",)))], []

    r1 = rank_one_check(p, planar=planar)
    if d >= 2 or not r1.verdict:
        notes = ()
        if r1.planar:
            notes = (f"{len(r1.planar)} isolated planar samples",)
        return [Region(t_range, NON_RANK_ONE,
                       RegionEvidence(degree=d,
                                      max_rank_one_residual=r1.max_residual,
                                      notes=notes))], []

    try:
        pivoted = pivot_frame(p.fc, p.grid, d, p.tol)
        pp = RuledPatch(pivoted, p.grid, p.tol)
        sheet = solve_striction(pp, d)
    except (PivotError, DegeneracyError) as exc:
        return [Region(t_range, UNDETERMINED,
                       RegionEvidence(degree=d,
                                      max_rank_one_residual=r1.max_residual,
                                      notes=(f"striction unavailable: {exc}",)))], []

    locus = singular_locus(pp, sheet, seed=seed)
    coverage = locus.singular_fraction
    if coverage < SINGULAR_COVERAGE:
        return [Region(t_range, UNDETERMINED,
                       RegionEvidence(degree=d,
                                      max_rank_one_residual=r1.max_residual,
                                      singular_fraction=coverage,
                                      notes=("developable segment whose sheet is not "
                                             "singular at the required coverage",)))], []

    u_pts = p.grid.u_points(sheet.free_count)
    verdicts: list[str | None] = []
    try:
        for t in ts:
            ranks = {striction_jacobian_rank(sheet, t, u, p.tol) for u in u_pts}
            if ranks == {m - 1}:
                verdicts.append(TANGENT)
            elif ranks == {m - 2}:
                verdicts.append(CONICAL)
            else:
                verdicts.append(None)
    except NumericError as exc:
        return [Region(t_range, UNDETERMINED,
                       RegionEvidence(degree=d,
                                      max_rank_one_residual=r1.max_residual,
                                      singular_fraction=coverage,
                                      notes=(f"sheet rank profile unavailable: {exc}",)))], []

    runs, boundary = _rank_runs(verdicts, ts)
    regions = []
    for i0, i1, kind in runs:
        rng = (float(ts[i0]), float(ts[i1 - 1]))
        rank = m - 1 if kind == TANGENT else m - 2
        if (i1 - 1) - i0 < MIN_RUN_STEPS:
            regions.append(Region(rng, UNDETERMINED,
                                  RegionEvidence(degree=d,
                                                 max_rank_one_residual=r1.max_residual,
                                                 striction_rank_profile=(rank,),
                                                 singular_fraction=coverage,
                                                 notes=("run narrower than the minimum "
                                                        "region width",))))
            continue
        apex = None
        if kind == CONICAL and sheet.free_count == 0:
            pts = np.array([sheet.beta(t) for t in ts[i0:i1]])
            if np.linalg.norm(pts - pts.mean(axis=0), axis=1).max() < 1e-6:
                apex = tuple(float(v) for v in pts.mean(axis=0))
        regions.append(Region(rng, kind,
                              RegionEvidence(degree=d,
                                             max_rank_one_residual=r1.max_residual,
                                             striction_rank_profile=(rank,),
                                             singular_fraction=coverage,
                                             apex=apex)))
    return regions, boundary


def classify_patch(p: RuledPatch, seed: int = 0) -> ClassificationReport:
    """Label the sampled patch region by region. Deterministic given seed."""
    profile = degree_profile(p.fc, p.grid, p.tol)
    segments = constant_degree_segments(profile)
    ts = p.grid.t_samples

    regions: list[Region] = []
    boundary: list[float] = []
    for i0, i1, d in segments:
        if i1 - i0 < 3:
            # too narrow even to sample; its points are boundary material
            boundary.extend(float(t) for t in ts[i0:i1])
            continue
        sub = RuledPatch(p.fc, p.grid.restrict(i0, i1), p.tol)
        segment_regions, segment_boundary = _classify_segment(sub, d, seed)
        regions.extend(segment_regions)
        boundary.extend(segment_boundary)
        if i1 < ts.size:
            boundary.append(float(0.5 * (ts[i1 - 1] + ts[i1])))

    full = rank_one_check(p)
    report = ClassificationReport(
        regions=tuple(regions),
        boundary_points=tuple(sorted(boundary)),
        is_rank_one=full.verdict,
        is_cylinder=profile.cylindrical,
        degrees=tuple(int(v) for v in profile.degrees),
        borderline_t=tuple(profile.borderline_t),
    )
    for region in report.regions:
        region.validate(p.m, p.tol)
    return report


@dataclass(frozen=True, eq=False)
class ConverseResult:
    agree: bool
    rank_one: bool
    singular_coverage: float


def converse_check(p: RuledPatch, seed: int = 0) -> ConverseResult:
    """On a degree-one patch, developability and a fully singular sheet
    must come together; returns whether the two verdicts agree."""
    profile = degree_profile(p.fc, p.grid, p.tol)
    if profile.constant_degree != 1:
        raise ValidationError("converse check requires degree 1 on the whole grid")
    pivoted = pivot_frame(p.fc, p.grid, 1, p.tol)
    pp = RuledPatch(pivoted, p.grid, p.tol)
    sheet = solve_striction(pp, 1)
    locus = singular_locus(pp, sheet, seed=seed)
    r1 = rank_one_check(p)
    covered = locus.singular_fraction >= SINGULAR_COVERAGE
    return ConverseResult(agree=(covered == r1.verdict),
                          rank_one=r1.verdict,
                          singular_coverage=locus.singular_fraction)
