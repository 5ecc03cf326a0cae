"""The striction sheet: the locus inside a ruled patch where the sweep
direction is orthogonal to every projected frame derivative.

For a patch of constant degree d (frame pivoted so the trailing d fields
carry the degree), the defining orthogonality conditions reduce to a d x d
linear system whose matrix depends on t only and whose right-hand side is
affine in the free ruling coordinates. One factorization per t therefore
solves the sheet for all ruling positions at once. All singular points of
the patch sit on this sheet, which the locus scan verifies sample-wise.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import cho_factor, cho_solve, qr, solve_triangular
from scipy.optimize import least_squares

from .distribution import rho_at
from .errors import DegeneracyError, NumericError, RegularityError, ValidationError
from .fields import AffineCombinationField, ComposedField, ParameterMap
from .multilinear import DEFAULT_TOLERANCES, TolerancePolicy, numerical_rank, wedge_norm
from .parametric import FramedCurve, SampleGrid
from .ruledgeom import RuledPatch, jacobian_sigma


@dataclass(frozen=True, eq=False)
class StrictionSystem:
    """Per-parameter linear system A u_solved = b for the sheet coordinates.

    A is the Gram matrix of the trailing projected frame derivatives
    (symmetric, positive definite under the degree assumption); b is
    stored in affine form over (1, free ruling coordinates).
    """

    t: float
    A: np.ndarray         # (d, d)
    b_affine: np.ndarray  # (d, m-d): column 0 constant, then free-u coefficients


def assemble_system(fc: FramedCurve, t: float, d: int,
                    tol: TolerancePolicy = DEFAULT_TOLERANCES) -> StrictionSystem:
    """Build the striction system at t from the pivoted frame.

    Entry (h, c) of A pairs the derivative of trailing field c with the
    projected derivative of trailing field h; the affine right-hand side
    collects the directrix and leading-field terms with a sign flip.
    """
    k = fc.m - 1
    if not (1 <= d <= k):
        raise ValidationError(f"degree d={d} out of range 1..{k}")
    sample = rho_at(fc, t, tol)
    rho = sample.rho_vectors
    xdot = fc.frame_values(t, 1)
    gdot = fc.directrix_values(t, 1)
    lo = k - d
    a = np.empty((d, d))
    for h in range(d):
        for c in range(d):
            a[h, c] = xdot[lo + c] @ rho[lo + h]
    b = np.empty((d, k - d + 1))
    for h in range(d):
        b[h, 0] = -(gdot @ rho[lo + h])
        for j in range(k - d):
            b[h, 1 + j] = -(xdot[j] @ rho[lo + h])
    eigmin = float(np.linalg.eigvalsh(0.5 * (a + a.T)).min())
    if eigmin < tol.zero_abs_tol:
        raise DegeneracyError(
            f"striction system degenerate at t={t}: smallest eigenvalue {eigmin:.3e}")
    return StrictionSystem(t=float(t), A=a, b_affine=b)


@dataclass(eq=False)
class StrictionSheet:
    """Solved sheet coordinates over the grid, interpolated in t.

    The solved trailing coordinates are affine in the free ruling
    coordinates with t-dependent weights, so a single vector spline per
    t-node captures the whole sheet exactly up to interpolation in t.
    """

    d: int
    fc: FramedCurve
    grid: SampleGrid
    solution_nodes: np.ndarray       # (N, d, m-d)
    max_solve_residual: float
    max_defining_residual: float
    fallback_ts: list = field(default_factory=list)

    def __post_init__(self):
        self._spline = CubicSpline(self.grid.t_samples, self.solution_nodes, axis=0)

    @property
    def free_count(self) -> int:
        return self.fc.m - 1 - self.d

    def _affine(self, u_free) -> np.ndarray:
        u_free = np.atleast_1d(np.asarray(u_free, dtype=float))
        if u_free.shape != (self.free_count,):
            raise ValidationError(
                f"expected {self.free_count} free coordinates, got {u_free.shape}")
        return np.concatenate([[1.0], u_free])

    def solved(self, t: float, u_free=()) -> np.ndarray:
        """Trailing ruling coordinates of the sheet at (t, u_free)."""
        return self._spline(t) @ self._affine(u_free)

    def solved_dot(self, t: float, u_free=()) -> np.ndarray:
        return self._spline(t, nu=1) @ self._affine(u_free)

    def full_u(self, t: float, u_free=()) -> np.ndarray:
        u_free = np.atleast_1d(np.asarray(u_free, dtype=float))
        return np.concatenate([u_free, self.solved(t, u_free)])

    def beta(self, t: float, u_free=()) -> np.ndarray:
        """Point of the sheet in ambient coordinates."""
        fc = self.fc
        out = fc.directrix_values(t, 0)
        x = fc.frame_values(t)
        u = self.full_u(t, u_free)
        return out + u @ x

    def beta_dot(self, t: float, u_free=()) -> np.ndarray:
        """t-derivative of the sheet map at fixed free coordinates."""
        fc = self.fc
        u_free = np.atleast_1d(np.asarray(u_free, dtype=float))
        x = fc.frame_values(t)
        xdot = fc.frame_values(t, 1)
        out = fc.directrix_values(t, 1)
        for j in range(self.free_count):
            out = out + u_free[j] * xdot[j]
        s = self.solved(t, u_free)
        sdot = self.solved_dot(t, u_free)
        lo = self.free_count
        for h in range(self.d):
            out = out + sdot[h] * x[lo + h] + s[h] * xdot[lo + h]
        return out

    def beta_partials(self, t: float, u_free=()) -> np.ndarray:
        """(m-d, dim) Jacobian of the sheet map: t-partial, then free partials."""
        fc = self.fc
        x = fc.frame_values(t)
        coeff = self._spline(t)  # (d, m-d); columns 1.. are free-u weights
        rows = [self.beta_dot(t, u_free)]
        lo = self.free_count
        for j in range(self.free_count):
            row = x[j].copy()
            for h in range(self.d):
                row = row + coeff[h, 1 + j] * x[lo + h]
            rows.append(row)
        return np.vstack(rows)

    def defining_residual(self, t: float, u_free=()) -> float:
        """max_h |<beta_dot, rho X_h>| over the trailing fields."""
        rho = rho_at(self.fc, t).rho_vectors
        bd = self.beta_dot(t, u_free)
        lo = self.free_count
        return max(abs(float(bd @ rho[lo + h])) for h in range(self.d))


def solve_striction(p: RuledPatch, d: int) -> StrictionSheet:
    """Assemble and solve the striction system at every grid sample.

    A symmetric positive-definite factorization is used; when the
    smallest eigenvalue sits within a factor 10 of the cutoff the solve
    falls back to column-pivoted QR and the sample is reported.
    """
    fc, grid, tol = p.fc, p.grid, p.tol
    ts = grid.t_samples
    k = fc.m - 1
    nodes = np.empty((ts.size, d, k - d + 1))
    fallback = []
    max_solve = 0.0
    for i, t in enumerate(ts):
        sys = assemble_system(fc, t, d, tol)
        eigmin = float(np.linalg.eigvalsh(sys.A).min())
        if eigmin < 10.0 * tol.zero_abs_tol:
            q, r, piv = qr(sys.A, pivoting=True)
            sol = np.empty_like(sys.b_affine)
            sol[piv] = solve_triangular(r, q.T @ sys.b_affine)
            fallback.append(float(t))
        else:
            sol = cho_solve(cho_factor(sys.A), sys.b_affine)
        nodes[i] = sol
        max_solve = max(max_solve, float(np.abs(sys.A @ sol - sys.b_affine).max()))
    sheet = StrictionSheet(d=d, fc=fc, grid=grid, solution_nodes=nodes,
                           max_solve_residual=max_solve,
                           max_defining_residual=0.0, fallback_ts=fallback)
    max_def = max(sheet.defining_residual(t, np.zeros(sheet.free_count)) for t in ts)
    sheet.max_defining_residual = max_def
    if max_def > tol.zero_abs_tol:
        raise NumericError(
            f"striction sheet violates its defining property: residual {max_def:.3e}")
    return sheet


def striction_jacobian_rank(sheet: StrictionSheet, t: float, u_free=(),
                            tol: TolerancePolicy = DEFAULT_TOLERANCES) -> int:
    """Rank of the sheet Jacobian; never below m-d-1 for a valid sheet."""
    rank = numerical_rank(sheet.beta_partials(t, u_free), tol)
    floor = sheet.fc.m - sheet.d - 1
    if rank < floor:
        raise NumericError(
            f"sheet Jacobian rank {rank} below the floor {floor} at t={t}; "
            "tolerances are likely misconfigured")
    return rank


@dataclass(frozen=True, eq=False)
class SingularSample:
    t: float
    u_free: np.ndarray
    wedge_residual: float
    singular: bool


@dataclass(frozen=True, eq=False)
class SingularLocus:
    """Where the patch degenerates: wedge residuals along the sheet, plus
    a randomized regularity spot-check just off the sheet."""

    entries: tuple[SingularSample, ...]
    offsheet_total: int
    offsheet_regular: int
    offsheet_failures: tuple

    @property
    def singular_fraction(self) -> float:
        if not self.entries:
            return 0.0
        return sum(1 for e in self.entries if e.singular) / len(self.entries)

    @property
    def offsheet_all_regular(self) -> bool:
        return self.offsheet_regular == self.offsheet_total


def singular_locus(p: RuledPatch, sheet: StrictionSheet,
                   offsheet_checks: int = 32, seed: int = 0) -> SingularLocus:
    """Wedge test along the sheet and regularity just off it.

    A sheet sample is singular when the t-derivative of the sheet map is
    wedged to zero by the frame. Off-sheet points perturb every solved
    coordinate by +-delta with delta = 10 grid u-spacings; the patch must
    be regular there.
    """
    fc, grid, tol = p.fc, p.grid, p.tol
    entries = []
    u_pts = grid.u_points(sheet.free_count)
    for t in grid.t_samples:
        x = fc.frame_values(t)
        for u_free in u_pts:
            res = wedge_norm(np.vstack([sheet.beta_dot(t, u_free), x]))
            entries.append(SingularSample(
                t=float(t), u_free=u_free, wedge_residual=float(res),
                singular=bool(res < tol.zero_abs_tol)))
    rng = np.random.default_rng(seed)
    axis = grid.u_axis
    spacing = float(axis[1] - axis[0]) if axis.size > 1 else grid.u_extent / 5.0
    delta = 10.0 * spacing
    lo, hi = fc.interval
    failures = []
    for _ in range(offsheet_checks):
        t = float(rng.uniform(lo, hi))
        u_free = rng.uniform(-grid.u_extent, grid.u_extent, size=sheet.free_count)
        signs = rng.choice([-1.0, 1.0], size=sheet.d)
        u = np.concatenate([u_free, sheet.solved(t, u_free) + delta * signs])
        if numerical_rank(jacobian_sigma(p, t, u), tol) != fc.m:
            failures.append((t, u.tolist()))
    return SingularLocus(entries=tuple(entries),
                         offsheet_total=offsheet_checks,
                         offsheet_regular=offsheet_checks - len(failures),
                         offsheet_failures=tuple(failures))


@dataclass(frozen=True, eq=False)
class EquivalentConditionResult:
    rows: tuple  # (t, u_free, sheet_wedge_vanishes, augmented_all_vanish, agree)
    skipped: tuple  # t where every projected derivative is below tolerance
    all_agree: bool


def equivalent_condition_check(p: RuledPatch, sheet: StrictionSheet) -> EquivalentConditionResult:
    """Cross-check the sheet wedge test against its frame-derivative-augmented
    variant; the two must agree wherever some projected derivative is nonzero."""
    fc, grid, tol = p.fc, p.grid, p.tol
    rows, skipped = [], []
    vacuous = fc.m + 1 > fc.dim
    u_pts = grid.u_points(sheet.free_count)
    for t in grid.t_samples:
        rho = rho_at(fc, t, tol).rho_vectors
        js = [j for j in range(fc.m - 1) if np.linalg.norm(rho[j]) >= tol.zero_abs_tol]
        if not js:
            skipped.append(float(t))
            continue
        x = fc.frame_values(t)
        xdot = fc.frame_values(t, 1)
        for u_free in u_pts:
            bd = sheet.beta_dot(t, u_free)
            plain = bool(wedge_norm(np.vstack([bd, x])) < tol.zero_abs_tol)
            if vacuous:
                # the augmented wedge involves more vectors than the ambient
                # dimension, hence vanishes identically
                augmented = [True for _ in js]
            else:
                augmented = [
                    bool(wedge_norm(np.vstack([xdot[j], bd, x])) < tol.zero_abs_tol)
                    for j in js]
            agree = all(a == plain for a in augmented)
            rows.append((float(t), u_free.tolist(), plain, all(augmented), agree))
    all_agree = all(r[4] for r in rows)
    return EquivalentConditionResult(rows=tuple(rows), skipped=tuple(skipped),
                                     all_agree=all_agree)


@dataclass(frozen=True, eq=False)
class InvarianceResult:
    per_offset: tuple  # (offset list, max deviation) for each tested offset
    skipped: tuple     # (offset list, reason)
    max_deviation: float


def _distance_to_sheet(sheet: StrictionSheet, point: np.ndarray,
                       seeds: np.ndarray) -> float:
    """Distance from a point to the sheet as a continuous object.

    Seeded at the nearest sampled sheet point, then refined by bounded
    least squares over (t, free coordinates).
    """
    lo, hi = sheet.fc.interval
    ext = sheet.grid.u_extent
    free = sheet.free_count
    cloud = seeds
    d2 = np.sum((cloud[:, free + 1:] - point) ** 2, axis=1)
    best = cloud[int(np.argmin(d2))]

    def residual(theta):
        return sheet.beta(theta[0], theta[1:]) - point

    bounds = ([lo] + [-4.0 * ext] * free, [hi] + [4.0 * ext] * free)
    x0 = np.clip(best[:free + 1], bounds[0], bounds[1])
    fit = least_squares(residual, x0, bounds=bounds, xtol=1e-14, ftol=1e-14, gtol=1e-14)
    return float(np.linalg.norm(fit.fun))


def directrix_invariance(p: RuledPatch, sheet: StrictionSheet, offsets,
                         samples_per_axis: int = 3) -> InvarianceResult:
    """Re-solve the sheet from shifted directrices and compare images.

    Each offset is a constant ruling coordinate vector c; the shifted
    directrix t -> sigma(t, c) is reparametrized to unit speed, the frame
    is composed with the same parameter map, and the sheet is re-solved.
    The deviation is the largest distance from a re-solved sheet sample to
    the original sheet (continuous nearest-point refinement).
    """
    fc, grid, tol = p.fc, p.grid, p.tol
    if sheet.d < 1:
        raise ValidationError("invariance requires a solved sheet (degree >= 1)")
    # sample cloud of the original sheet for seeding: rows (t, u_free..., beta...)
    seeds = []
    for t in grid.t_samples:
        for u_free in grid.u_points(sheet.free_count):
            seeds.append(np.concatenate([[t], u_free, sheet.beta(t, u_free)]))
    seeds = np.vstack(seeds)

    per_offset, skipped = [], []
    worst = 0.0
    for c in offsets:
        c = np.atleast_1d(np.asarray(c, dtype=float))
        if c.shape != (fc.m - 1,):
            raise ValidationError(f"offset must have {fc.m - 1} coordinates")
        shifted = AffineCombinationField(fc.directrix, list(fc.frame), c)
        try:
            pmap = ParameterMap(shifted, fc.interval)
        except RegularityError as exc:
            skipped.append((c.tolist(), str(exc)))
            continue
        new_directrix = ComposedField(shifted, pmap)
        new_frame = [ComposedField(f, pmap) for f in fc.frame]
        new_fc = FramedCurve(fc.dim, fc.m, new_directrix, tuple(new_frame),
                             (0.0, pmap.length))
        new_grid = SampleGrid.uniform((0.0, pmap.length), grid.t_samples.size,
                                      grid.u_extent, grid.u_samples_per_axis)
        new_sheet = solve_striction(RuledPatch(new_fc, new_grid, tol), sheet.d)
        axis = (np.linspace(-grid.u_extent, grid.u_extent, samples_per_axis)
                if sheet.free_count else np.zeros(1))
        dev = 0.0
        from itertools import product as _product
        free_pts = (list(_product(axis, repeat=sheet.free_count))
                    if sheet.free_count else [()])
        for s in new_grid.t_samples[:: max(1, new_grid.t_samples.size // 64)]:
            for u_free in free_pts:
                q = new_sheet.beta(s, np.asarray(u_free))
                dev = max(dev, _distance_to_sheet(sheet, q, seeds))
        per_offset.append((c.tolist(), dev))
        worst = max(worst, dev)
    return InvarianceResult(per_offset=tuple(per_offset), skipped=tuple(skipped),
                            max_deviation=worst)


def write_striction_csv(sheet: StrictionSheet, locus: SingularLocus, path):
    """Sheet export with the fixed header
    t, u1..u{m-d-1}, s{m-d}..s{m-1}, b1..b{m+n}, wedge_residual, singular."""
    m, d, dim = sheet.fc.m, sheet.d, sheet.fc.dim
    header = (["t"]
              + [f"u{j}" for j in range(1, m - d)]
              + [f"s{j}" for j in range(m - d, m)]
              + [f"b{i}" for i in range(1, dim + 1)]
              + ["wedge_residual", "singular"])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for e in locus.entries:
            solved = sheet.solved(e.t, e.u_free)
            beta = sheet.beta(e.t, e.u_free)
            row = ([repr(e.t)]
                   + [repr(float(v)) for v in e.u_free]
                   + [repr(float(v)) for v in solved]
                   + [repr(float(v)) for v in beta]
                   + [repr(e.wedge_residual), "true" if e.singular else "false"])
            writer.writerow(row)
