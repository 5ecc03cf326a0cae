"""Geometry of the swept patch sigma(t, u) = directrix + u . frame.

Evaluation, Jacobian and regularity, the second fundamental form along
the t-direction, first normal space dimensions, planar points, the
rank-one (developability) wedge test, tangent-space stability along
rulings, and sectional curvature from the Gauss equation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import RegularityError, ValidationError
from .multilinear import (DEFAULT_TOLERANCES, TolerancePolicy, numerical_rank,
                          spans_equal, wedge_norm)
from .parametric import FramedCurve, SampleGrid


@dataclass(frozen=True, eq=False)
class RuledPatch:
    """A framed curve with its sampling grid and tolerance policy."""

    fc: FramedCurve
    grid: SampleGrid
    tol: TolerancePolicy = DEFAULT_TOLERANCES

    @property
    def m(self) -> int:
        return self.fc.m

    @property
    def dim(self) -> int:
        return self.fc.dim


def _as_u(p: RuledPatch, u) -> np.ndarray:
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if u.shape != (p.m - 1,):
        raise ValidationError(f"expected {p.m - 1} ruling coordinates, got shape {u.shape}")
    return u


def eval_sigma(p: RuledPatch, t: float, u) -> np.ndarray:
    """Point of the patch at parameters (t, u)."""
    u = _as_u(p, u)
    return p.fc.directrix_values(t, 0) + u @ p.fc.frame_values(t)


def jacobian_sigma(p: RuledPatch, t: float, u) -> np.ndarray:
    """(m, dim) matrix of partials: d/dt first, then the ruling directions."""
    u = _as_u(p, u)
    dt = p.fc.directrix_values(t, 1) + u @ p.fc.frame_values(t, 1)
    return np.vstack([dt, p.fc.frame_values(t)])


def is_regular(p: RuledPatch, t: float, u) -> bool:
    return numerical_rank(jacobian_sigma(p, t, u), p.tol) == p.m


@dataclass(frozen=True, eq=False)
class PointwiseSecondForm:
    """Second fundamental form vectors II(x0, x_i) at one patch point."""

    t: float
    u: np.ndarray
    II_vectors: np.ndarray  # (m, dim): entries for x0 paired with x0, x1, ..., x_{m-1}
    first_normal_dim: int


def _second_form_vectors(p: RuledPatch, t: float, u: np.ndarray):
    """Jacobian, normal projector residuals of sigma_tt and Xdot_j.

    All mixed second partials d2(sigma)/du_i du_j vanish, so these m
    vectors span the image of the second fundamental form.
    """
    jac = jacobian_sigma(p, t, u)
    s, vt = np.linalg.svd(jac, full_matrices=False)[1:]
    if s[0] < p.tol.zero_abs_tol or s[-1] <= p.tol.rank_rel_tol * s[0]:
        raise RegularityError(f"patch is singular at (t={t}, u={u.tolist()})")
    tangent = vt

    def normal_part(v):
        return v - tangent.T @ (tangent @ v)

    sigma_tt = p.fc.directrix_values(t, 2) + u @ p.fc.frame_values(t, 2)
    vecs = np.empty((p.m, p.dim))
    vecs[0] = normal_part(sigma_tt)
    xdot = p.fc.frame_values(t, 1)
    for j in range(p.m - 1):
        vecs[j + 1] = normal_part(xdot[j])
    return jac, vecs


def second_form_along_directrix(p: RuledPatch, t: float, u) -> PointwiseSecondForm:
    """Second form vectors II(x0, .) at a regular point, in ambient coordinates."""
    u = _as_u(p, u)
    _, vecs = _second_form_vectors(p, t, u)
    return PointwiseSecondForm(
        t=float(t), u=u,
        II_vectors=vecs,
        first_normal_dim=numerical_rank(vecs, p.tol),
    )


@dataclass(frozen=True, eq=False)
class BoundsReport:
    """First-normal-space dimension versus the degree bounds, per sample."""

    d: int
    entries: list  # (t, u, first_normal_dim, ok)
    violations: list
    skipped_singular: int

    @property
    def ok(self) -> bool:
        return not self.violations


def first_normal_bounds_check(p: RuledPatch, d: int, scan=None) -> BoundsReport:
    """Check d-1 <= first_normal_dim <= d+1 at every regular grid sample."""
    if scan is None:
        scan = second_form_scan(p)
    raw, skipped = scan
    entries, violations = [], []
    for t, u, dim in raw:
        ok = (d - 1) <= dim <= (d + 1)
        entries.append((t, u, dim, ok))
        if not ok:
            violations.append(entries[-1])
    return BoundsReport(d=d, entries=entries, violations=violations,
                        skipped_singular=skipped)


def second_form_scan(p: RuledPatch) -> tuple[list[tuple[float, list[float], int]], int]:
    """first_normal_dim at every regular grid sample, plus the singular count."""
    entries = []
    skipped = 0
    u_pts = p.grid.u_points(p.m - 1)
    for t in p.grid.t_samples:
        for u in u_pts:
            try:
                form = second_form_along_directrix(p, t, u)
            except RegularityError:
                skipped += 1
                continue
            entries.append((float(t), u.tolist(), form.first_normal_dim))
    return entries, skipped


def planar_points(p: RuledPatch, scan=None) -> list[tuple[float, list[float]]]:
    """Regular grid samples where the second fundamental form vanishes."""
    if scan is None:
        scan = second_form_scan(p)[0]
    return [(t, u) for t, u, dim in scan if dim == 0]


@dataclass(frozen=True, eq=False)
class RankOneResult:
    """Outcome of the developability wedge system plus the planar-point scan."""

    verdict: bool
    max_residual: float
    residual_table: list  # (t, max wedge norm over the frame derivatives)
    planar: list = field(default_factory=list)


def rank_one_check(p: RuledPatch, planar: list | None = None) -> RankOneResult:
    """Developability test: every frame derivative must be wedged away by
    the tangent configuration, and no sampled point may be planar.

    When the wedge would involve more vectors than the ambient dimension
    it vanishes identically and only the planar scan decides. A
    precomputed planar-point list may be passed to avoid re-scanning.
    """
    fc = p.fc
    table = []
    worst = 0.0
    vacuous = fc.m + 1 > fc.dim
    for t in p.grid.t_samples:
        if vacuous:
            table.append((float(t), 0.0))
            continue
        x = fc.frame_values(t)
        gdot = fc.directrix_values(t, 1)
        xdot = fc.frame_values(t, 1)
        res = max(wedge_norm(np.vstack([xdot[j], gdot, x])) for j in range(fc.m - 1))
        table.append((float(t), res))
        worst = max(worst, res)
    if planar is None:
        planar = planar_points(p)
    verdict = worst < p.tol.zero_abs_tol and not planar
    return RankOneResult(verdict=verdict, max_residual=worst,
                         residual_table=table, planar=planar)


def tangent_space_stability(p: RuledPatch, t: float, u_pairs) -> bool:
    """True when the tangent space is the same subspace at each pair of
    ruling positions (t fixed). Both points must be regular."""
    for u_a, u_b in u_pairs:
        ja = jacobian_sigma(p, t, u_a)
        jb = jacobian_sigma(p, t, u_b)
        for name, j in (("first", ja), ("second", jb)):
            if numerical_rank(j, p.tol) < p.m:
                raise RegularityError(
                    f"{name} comparison point is singular at t={t}")
        if not spans_equal(ja, jb, p.tol):
            return False
    return True


def _orthonormal_tangent_with_coeffs(jac: np.ndarray, tol: TolerancePolicy):
    """Gram-Schmidt on the Jacobian rows, tracking the change of basis.

    Returns (E, S) with E orthonormal (m, dim) and S lower triangular so
    that E = S @ jac.
    """
    m = jac.shape[0]
    basis = np.empty_like(jac)
    coeff = np.zeros((m, m))
    for i in range(m):
        w = jac[i].copy()
        c = np.zeros(m)
        c[i] = 1.0
        for a in range(i):
            proj = basis[a] @ jac[i]
            w -= proj * basis[a]
            c -= proj * coeff[a]
        norm = np.linalg.norm(w)
        if norm < tol.zero_abs_tol:
            raise RegularityError("tangent basis is degenerate")
        basis[i] = w / norm
        coeff[i] = c / norm
    return basis, coeff


@dataclass(frozen=True, eq=False)
class FlatnessResult:
    """Largest |sectional curvature| seen over coordinate tangent planes."""

    max_abs: float
    worst: tuple | None
    checked: int
    skipped_singular: int

    def is_flat(self, curvature_tol: float = 1e-6) -> bool:
        return self.max_abs < curvature_tol


def flatness_check(p: RuledPatch) -> FlatnessResult:
    """Sectional curvatures from the Gauss equation at regular grid samples.

    The second form is assembled in an orthonormalized tangent basis; only
    the 2-planes spanned by pairs of that basis are inspected, which is
    enough to witness non-flatness for ruled patches (the form vanishes on
    ruling pairs).
    """
    max_abs, worst = 0.0, None
    checked = skipped = 0
    u_pts = p.grid.u_points(p.m - 1)
    for t in p.grid.t_samples:
        for u in u_pts:
            try:
                jac, vecs = _second_form_vectors(p, t, u)
            except RegularityError:
                skipped += 1
                continue
            _, s = _orthonormal_tangent_with_coeffs(jac, p.tol)
            # II in the orthonormal basis; only row/column 0 of the
            # coordinate form is nonzero.
            m = p.m
            ii = np.zeros((m, m, p.dim))
            for a in range(m):
                for b in range(a, m):
                    v = s[a, 0] * s[b, 0] * vecs[0]
                    for j in range(1, m):
                        v = v + (s[a, 0] * s[b, j] + s[a, j] * s[b, 0]) * vecs[j]
                    ii[a, b] = ii[b, a] = v
            checked += 1
            for a in range(m):
                for b in range(a + 1, m):
                    k_ab = float(ii[a, a] @ ii[b, b] - ii[a, b] @ ii[a, b])
                    if abs(k_ab) > max_abs:
                        max_abs, worst = abs(k_ab), (float(t), u.tolist(), (a, b), k_ab)
    return FlatnessResult(max_abs=max_abs, worst=worst, checked=checked,
                          skipped_singular=skipped)


def sectional_curvature(p: RuledPatch, t: float, u) -> float:
    """Curvature of the (t, first ruling) coordinate plane at a regular point.

    Only meaningful for m=2, where it is the full intrinsic curvature.
    """
    u = _as_u(p, u)
    jac, vecs = _second_form_vectors(p, t, u)
    _, s = _orthonormal_tangent_with_coeffs(jac, p.tol)
    ii = {}
    for a in (0, 1):
        for b in (0, 1):
            v = s[a, 0] * s[b, 0] * vecs[0]
            for j in range(1, p.m):
                v = v + (s[a, 0] * s[b, j] + s[a, j] * s[b, 0]) * vecs[j]
            ii[a, b] = v
    return float(ii[0, 0] @ ii[1, 1] - ii[0, 1] @ ii[0, 1])
