"""Degree of the ruling distribution and frame pivoting.

For each parameter t the frame derivatives are projected off the ruling
span; the rank of those projections is the degree at t. Pivoting reorders
(or, if no constant reordering works, smoothly rotates) the frame so the
trailing d fields alone carry the full degree, which the striction solver
assumes.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import FrameError, NumericError, PivotError, ValidationError
from .fields import FrameCombinationField, SplineCoefficients
from .multilinear import (DEFAULT_TOLERANCES, TolerancePolicy, gram_matrix,
                          project_orthogonal)
from .parametric import FramedCurve, SampleGrid


@dataclass(frozen=True, eq=False)
class RhoSample:
    """Projected frame derivatives at one parameter value."""

    t: float
    rho_vectors: np.ndarray  # (m-1, dim), row j orthogonal to the ruling span
    degree: int
    borderline: bool = False


@dataclass(frozen=True, eq=False)
class DegreeProfile:
    """Degree of the ruling distribution at every grid sample."""

    samples: tuple[RhoSample, ...]
    constant_degree: int | None
    cylindrical: bool
    noncylindrical: bool

    @property
    def degrees(self) -> np.ndarray:
        return np.array([s.degree for s in self.samples], dtype=int)

    @property
    def borderline_t(self) -> list[float]:
        return [s.t for s in self.samples if s.borderline]


def _degree_and_borderline(rho: np.ndarray, tol: TolerancePolicy) -> tuple[int, bool]:
    if rho.shape[0] == 0:
        return 0, False
    s = np.linalg.svd(rho, compute_uv=False)
    if s[0] < tol.zero_abs_tol:
        return 0, bool(s[0] > 0.1 * tol.zero_abs_tol)
    cutoff = tol.rank_rel_tol * s[0]
    degree = int(np.sum(s > cutoff))
    borderline = bool(np.any((s >= 0.1 * cutoff) & (s <= 10.0 * cutoff)))
    return degree, borderline


def rho_at(fc: FramedCurve, t: float, tol: TolerancePolicy = DEFAULT_TOLERANCES) -> RhoSample:
    """Project each frame derivative off the ruling span at t.

    The degree at t is the rank of the projected vectors. Raises a frame
    error when the frame fails its orthonormality tolerance at t.
    """
    lo, hi = fc.interval
    if not (lo - 1e-9 <= t <= hi + 1e-9):
        raise ValidationError(f"t={t} outside curve interval [{lo}, {hi}]")
    x = fc.frame_values(t)
    dev = np.abs(gram_matrix(x) - np.eye(fc.m - 1)).max()
    if dev > tol.derivative_check_tol:
        raise FrameError(f"frame is not orthonormal at t={t} (deviation {dev:.3e})")
    xdot = fc.frame_values(t, 1)
    rho = np.array([project_orthogonal(xdot[j], x, tol) for j in range(fc.m - 1)])
    degree, borderline = _degree_and_borderline(rho, tol)
    bound = min(fc.m - 1, fc.codim + 1)
    if degree > bound:
        raise NumericError(
            f"degree {degree} at t={t} exceeds the bound min(m-1, n+1)={bound}; "
            "tolerances are likely misconfigured")
    return RhoSample(t=float(t), rho_vectors=rho, degree=degree, borderline=borderline)


def degree_profile(fc: FramedCurve, grid: SampleGrid,
                   tol: TolerancePolicy = DEFAULT_TOLERANCES) -> DegreeProfile:
    """Degree of the ruling distribution at every grid sample."""
    samples = tuple(rho_at(fc, t, tol) for t in grid.t_samples)
    degs = {s.degree for s in samples}
    constant = degs.pop() if len(degs) == 1 else None
    degrees = [s.degree for s in samples]
    return DegreeProfile(
        samples=samples,
        constant_degree=constant,
        cylindrical=all(d == 0 for d in degrees),
        noncylindrical=all(d > 0 for d in degrees),
    )


def constant_degree_segments(profile: DegreeProfile) -> list[tuple[int, int, int]]:
    """Maximal runs of equal degree, as (start, end_exclusive, degree)."""
    degrees = profile.degrees
    runs = []
    start = 0
    for i in range(1, degrees.size):
        if degrees[i] != degrees[start]:
            runs.append((start, i, int(degrees[start])))
            start = i
    runs.append((start, degrees.size, int(degrees[start])))
    return runs


def _smallest_sv(mat: np.ndarray) -> float:
    s = np.linalg.svd(mat, compute_uv=False)
    return float(s[-1]) if s.size else 0.0


def pivot_frame(fc: FramedCurve, grid: SampleGrid, d: int,
                tol: TolerancePolicy = DEFAULT_TOLERANCES) -> FramedCurve:
    """Rearrange the frame so its last d fields carry the full degree.

    Prefers the constant permutation whose trailing rho block is best
    conditioned over the whole grid; if none works, rotates the frame by
    the eigenvector matrix of the rho Gram (dominant directions last,
    signs smoothed along t). Fails with the offending samples when
    neither achieves the condition.
    """
    if d < 1:
        raise ValidationError("pivot requires degree >= 1")
    k = fc.m - 1
    ts = grid.t_samples
    samples = [rho_at(fc, t, tol) for t in ts]
    bad = [s.t for s in samples if s.degree != d]
    if bad:
        raise ValidationError(
            f"degree is not constantly {d} on the grid (first offenders: {bad[:3]})")
    rhos = [s.rho_vectors for s in samples]

    if d == k:
        return fc

    best_subset, best_score = None, -1.0
    for subset in combinations(range(k), d):
        score = min(_smallest_sv(r[list(subset)]) for r in rhos)
        if score > best_score:
            best_subset, best_score = subset, score
    if best_score > tol.zero_abs_tol:
        order = [j for j in range(k) if j not in best_subset] + list(best_subset)
        if order == list(range(k)):
            return fc
        return fc.with_frame([fc.frame[j] for j in order])

    # No constant permutation works: rotate by the eigenvectors of the
    # rho Gram matrix, ascending eigenvalue so dominant directions land last.
    coeff_nodes = np.empty((ts.size, k, k))
    prev = None
    for i, r in enumerate(rhos):
        g = r @ r.T
        _, q = np.linalg.eigh(0.5 * (g + g.T))
        if prev is not None:
            flip = np.sign(np.einsum("ij,ij->j", prev, q))
            flip[flip == 0] = 1.0
            q = q * flip
        prev = q
        coeff_nodes[i] = q
    coeffs = SplineCoefficients(ts, coeff_nodes)
    frame = [FrameCombinationField(list(fc.frame), coeffs, j, domain=fc.interval)
             for j in range(k)]
    rotated = fc.with_frame(frame)

    failing = []
    for t in ts:
        sample = rho_at(rotated, t, tol)
        if _smallest_sv(sample.rho_vectors[k - d:]) <= tol.zero_abs_tol:
            failing.append(float(t))
    if failing:
        raise PivotError(
            "no frame permutation or rotation makes the trailing "
            f"{d} fields carry the degree; failing t: {failing[:5]}")
    return rotated
