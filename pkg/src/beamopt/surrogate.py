"""Diffuse-approximation response surface over the variable box.

A point-dependent quadratic is fitted by moving least squares to the
closest samples of a precomputed cost grid: at a query point the
``m + 1`` nearest samples (m = quadratic basis size) are weighted by a
cubic window over the neighborhood radius and the weighted normal
equations are solved in locally shifted and scaled coordinates.  The
fitted coefficients expose the approximate value, gradient and Hessian
at the query point, which drives a damped Newton (or pure gradient)
descent to the surface minimum.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import BeamOptError

__all__ = [
    "SurrogateError",
    "SampleSet",
    "DiffuseModel",
    "basis_size",
    "quadratic_basis",
    "select_neighbors",
    "window_weight",
    "mls_fit",
    "surface_minimize",
    "SurfaceResult",
]

_COND_LIMIT = 1e12


class SurrogateError(BeamOptError):
    """Moment matrix stayed singular after regularization and growth."""


def _quad_pairs(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i, n)]


def basis_size(n: int) -> int:
    """Length of the quadratic basis in ``n`` variables: 1 + n + n(n+1)/2."""
    return 1 + n + n * (n + 1) // 2


def quadratic_basis(x: np.ndarray) -> np.ndarray:
    """Quadratic monomial basis ``[1, x_i, x_i x_j (i <= j)]`` at one point."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    quad = [x[i] * x[j] for i, j in _quad_pairs(x.size)]
    return np.concatenate([[1.0], x, quad])


def window_weight(s: float | np.ndarray) -> np.ndarray:
    """Cubic window ``1 - 3 s^2 + 2 s^3`` clamped to zero beyond s = 1."""
    s = np.minimum(np.abs(np.asarray(s, dtype=float)), 1.0)
    # the polynomial evaluates to -eps just below s = 1; keep weights >= 0
    return np.maximum(1.0 - 3.0 * s**2 + 2.0 * s**3, 0.0)


@dataclass
class SampleSet:
    """Cost samples over the variable box (typically a structured grid).

    Every value is expected to come from a converged equilibrium solve;
    the harness grid builder enforces that invariant.
    """

    points: np.ndarray  # (n_samples, n_vars)
    values: np.ndarray  # (n_samples,)
    grid_shape: tuple[int, ...] | None = None

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.points.shape[0],):
            raise ValueError("one value per sample point is required")

    @property
    def n_samples(self) -> int:
        return self.points.shape[0]

    @property
    def n_variables(self) -> int:
        return self.points.shape[1]

    @classmethod
    def from_grid(cls, func, box: np.ndarray, shape: tuple[int, ...]) -> "SampleSet":
        """Evaluate ``func`` on a structured grid over ``box`` (row-major order)."""
        box = np.atleast_2d(np.asarray(box, dtype=float))
        axes = [np.linspace(lo, hi, num) for (lo, hi), num in zip(box, shape)]
        grids = np.meshgrid(*axes, indexing="ij")
        points = np.stack([g.ravel() for g in grids], axis=1)
        values = np.array([func(p) for p in points], dtype=float)
        return cls(points, values, grid_shape=tuple(shape))

    def save_csv(self, path) -> None:
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"x{i + 1}" for i in range(self.n_variables)] + ["J"])
            for p, v in zip(self.points, self.values):
                writer.writerow([format(c, ".17g") for c in p] + [format(v, ".17g")])

    @classmethod
    def load_csv(cls, path) -> "SampleSet":
        path = Path(path)
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            n = len(header) - 1
            rows = [[float(c) for c in row] for row in reader if row]
        data = np.asarray(rows, dtype=float)
        return cls(data[:, :n], data[:, n])


@dataclass
class DiffuseModel:
    """Local quadratic expansion of the sampled cost at one query point."""

    point: np.ndarray
    constant: float
    gradient: np.ndarray
    hessian: np.ndarray
    neighbor_indices: np.ndarray
    radius: float
    coefficients: np.ndarray

    def predict(self, y: np.ndarray) -> float:
        """Evaluate the local expansion away from the fit point."""
        d = np.asarray(y, dtype=float) - self.point
        return float(self.constant + self.gradient @ d + 0.5 * d @ self.hessian @ d)


def select_neighbors(sample_set: SampleSet, x: np.ndarray, count: int) -> tuple[np.ndarray, float]:
    """Indices of the ``count`` nearest samples and the neighborhood radius.

    Distance ties are broken by sample index order (stable sort).
    """
    if count > sample_set.n_samples:
        raise SurrogateError(
            f"need {count} samples for the local fit, have {sample_set.n_samples}"
        )
    dist = np.linalg.norm(sample_set.points - np.asarray(x, dtype=float)[None, :], axis=1)
    order = np.argsort(dist, kind="stable")
    idx = order[:count]
    return idx, float(dist[idx].max())


def _solve_weighted_least_squares(P: np.ndarray, W: np.ndarray, j: np.ndarray) -> np.ndarray | None:
    """Minimizer of the weighted normal equations, or None when rank deficient.

    Solved through the QR route on the weighted design matrix, which gives
    the same coefficients as inverting ``P W P^T`` but without squaring the
    condition number; a ridge retry covers the nearly singular case.
    """
    m = P.shape[0]
    sqw = np.sqrt(W)
    A = sqw[:, None] * P.T
    rhs = sqw * j
    try:
        sol, _, rank, _ = np.linalg.lstsq(A, rhs, rcond=1.0 / _COND_LIMIT)
    except np.linalg.LinAlgError:
        return None
    if rank == m:
        return sol
    M = (P * W[None, :]) @ P.T
    M = M + (1e-12 * max(np.trace(M), 1e-300) / m) * np.eye(m)
    if np.linalg.cond(M) > _COND_LIMIT:
        return None
    try:
        return np.linalg.solve(M, P @ (W * j))
    except np.linalg.LinAlgError:
        return None


def mls_fit(sample_set: SampleSet, x: np.ndarray, n_neighbors: int | None = None) -> DiffuseModel:
    """Point-dependent quadratic fit of the sampled cost at ``x``.

    The basis is evaluated in coordinates shifted to the query point and
    scaled by the neighborhood radius, which keeps the moment matrix well
    conditioned; degenerate neighbor sets are retried with ``+n`` extra
    neighbors until the normal equations become solvable.

    Raises
    ------
    SurrogateError
        If the moment matrix stays singular even with every sample included.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = x.size
    m = basis_size(n)
    count = (m + 1) if n_neighbors is None else n_neighbors
    grown = False
    while True:
        idx, radius = select_neighbors(sample_set, x, count)
        pts = sample_set.points[idx]
        vals = sample_set.values[idx]
        if radius <= 0.0:
            raise SurrogateError("all selected neighbors coincide with the query point")
        local = (pts - x[None, :]) / radius
        P = np.stack([quadratic_basis(p) for p in local], axis=1)  # (m, count)
        dist = np.linalg.norm(pts - x[None, :], axis=1)
        W = window_weight(dist / radius)
        a = _solve_weighted_least_squares(P, W, vals)
        if a is not None:
            break
        if count >= sample_set.n_samples:
            raise SurrogateError("moment matrix singular even with all samples included")
        count = min(count + n, sample_set.n_samples)
        grown = True
    if grown:
        warnings.warn(
            f"degenerate neighbor set: grew the local fit to {count} samples",
            stacklevel=2,
        )
    gradient = a[1 : 1 + n] / radius
    hessian = np.zeros((n, n))
    for coeff, (i, j) in zip(a[1 + n :], _quad_pairs(n)):
        if i == j:
            hessian[i, i] = 2.0 * coeff
        else:
            hessian[i, j] = coeff
            hessian[j, i] = coeff
    hessian /= radius * radius
    return DiffuseModel(
        point=x.copy(),
        constant=float(a[0]),
        gradient=gradient,
        hessian=hessian,
        neighbor_indices=idx,
        radius=radius,
        coefficients=a,
    )


@dataclass
class SurfaceResult:
    x: np.ndarray
    value: float
    iterations: int
    converged: bool
    trail: list[np.ndarray] = field(default_factory=list)


def surface_minimize(
    sample_set: SampleSet,
    x0: np.ndarray,
    box: np.ndarray,
    use_hessian: bool = True,
    gradient_step: float = 0.05,
    step_tol: float = 1e-8,
    value_tol: float = 1e-9,
    max_iterations: int = 200,
) -> SurfaceResult:
    """Descend the diffuse approximation to its minimum inside the box.

    The model is refitted at every iterate (the coefficients are point
    dependent).  When the local Hessian is positive definite a Newton step
    is taken, otherwise (or with ``use_hessian=False``) a gradient step of
    fixed relative length ``gradient_step`` of the box widths.  Iterates
    are clamped to the box; convergence is declared when the effective
    move drops below ``step_tol`` times the box diagonal.
    """
    box = np.atleast_2d(np.asarray(box, dtype=float))
    lo, hi = box[:, 0], box[:, 1]
    widths = hi - lo
    diag = float(np.linalg.norm(widths))
    x = np.clip(np.asarray(x0, dtype=float), lo, hi)
    trail = [x.copy()]
    model = mls_fit(sample_set, x)
    for k in range(max_iterations):
        step = None
        if use_hessian:
            try:
                np.linalg.cholesky(model.hessian)
                step = np.linalg.solve(model.hessian, -model.gradient)
            except np.linalg.LinAlgError:
                step = None
        if step is None:
            scaled = model.gradient * widths
            norm = float(np.linalg.norm(scaled))
            if norm == 0.0:
                return SurfaceResult(x, model.constant, k, True, trail)
            step = -gradient_step * widths * (scaled / norm)
        # trust the local model only within its own neighborhood radius
        limit = float(np.linalg.norm(step)) / model.radius
        if limit > 1.0:
            step = step / limit
        new_x = np.clip(x + step, lo, hi)
        new_model = mls_fit(sample_set, new_x)
        # simple damping: halve the move while the refitted value increases
        halvings = 0
        while new_model.constant > model.constant and halvings < 8:
            step = 0.5 * step
            new_x = np.clip(x + step, lo, hi)
            new_model = mls_fit(sample_set, new_x)
            halvings += 1
        moved = float(np.linalg.norm(new_x - x))
        value_change = abs(new_model.constant - model.constant)
        x = new_x
        model = new_model
        trail.append(x.copy())
        if moved <= step_tol * diag:
            return SurfaceResult(x, model.constant, k + 1, True, trail)
        if value_change <= value_tol * max(abs(model.constant), 1e-30):
            # crawling along a flat valley of the surface: the approximate
            # cost no longer changes even though the iterate still moves
            return SurfaceResult(x, model.constant, k + 1, True, trail)
    return SurfaceResult(x, model.constant, max_iterations, False, trail)
