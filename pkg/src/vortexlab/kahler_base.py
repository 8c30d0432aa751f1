"""Two-chart discretization of the round sphere.

The sphere is covered by the stereographic charts ``z`` and ``w = 1/z``.  Each
chart carries a uniform ``N x N`` grid on the square ``[-R, R]^2`` with
``R = CHART_RADIUS``.  Fields are stored as arrays of shape ``(2, N, N)``;
index 0 is the z-chart, index 1 the w-chart.

Discrete operators are applied at the *interior* nodes (``|zeta| <=
INTERIOR_RADIUS``, away from the square boundary).  Every other node takes its
value from the opposite chart by tensor-product cubic interpolation, so a
field is determined by its interior values.  Integration blends the two charts
with a smooth partition of unity supported on ``|zeta| < R``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

CHART_RADIUS = 1.5
INTERIOR_RADIUS = 1.25
MIN_RESOLUTION = 16


class ConfigurationError(ValueError):
    """Raised for invalid geometric or solver configuration."""


def _smoothstep(s):
    # C-infinity step with S(s) + S(1 - s) = 1
    s = np.clip(s, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)
        b = np.where(s < 1, np.exp(-1.0 / np.where(s < 1, 1.0 - s, 1.0)), 0.0)
    return a / (a + b)


def blend_weight(zeta, radius=CHART_RADIUS):
    """Partition-of-unity weight of a chart at chart coordinate ``zeta``.

    Equal to 1 for ``|zeta| <= 1/radius`` and 0 for ``|zeta| >= radius``;
    ``blend_weight(zeta) + blend_weight(1/zeta) == 1``.
    """
    r = np.abs(zeta)
    a = np.log(radius)
    with np.errstate(divide="ignore"):
        t = np.log(r)
    return _smoothstep((a - t) / (2.0 * a))


def fubini_study_coeff(zeta, vol=1.0):
    """Coefficient ``g`` of the round Kahler form ``g (i/2) dz^dzbar``, total volume ``vol``."""
    return vol / (np.pi * (1.0 + np.abs(zeta) ** 2) ** 2)


def _cubic_weights(t):
    # Lagrange weights for nodes 0..3 at fractional position t (uniform spacing)
    return np.stack([
        -(t - 1) * (t - 2) * (t - 3) / 6.0,
        t * (t - 2) * (t - 3) / 2.0,
        -t * (t - 1) * (t - 3) / 2.0,
        t * (t - 1) * (t - 2) / 6.0,
    ], axis=-1)


@dataclass(frozen=True, eq=False)
class BaseGeometry:
    """Discretized sphere with Kahler form of total volume ``vol``."""

    resolution: int
    vol: float
    radius: float
    spacing: float
    coords: np.ndarray
    omega_coeff: np.ndarray
    blend: np.ndarray
    quad_weights: np.ndarray
    interior: np.ndarray
    _interp: sp.csr_matrix = field(repr=False)
    _sync_lu: object = field(repr=False)
    _fd: sp.csr_matrix = field(repr=False)

    @property
    def shape(self):
        return self.coords.shape

    @property
    def size(self):
        return self.coords.size

    @property
    def interior_index(self):
        return np.flatnonzero(self.interior.ravel())

    @property
    def exterior_index(self):
        return np.flatnonzero(~self.interior.ravel())

    @property
    def interp_matrix(self):
        """Sparse map from all nodal values to values at exterior nodes."""
        return self._interp

    @property
    def fd_matrix(self):
        """Sparse five-point flat Laplacian (rows: interior nodes, cols: all nodes)."""
        return self._fd

    def scaled(self, factor):
        """Same grid with the Kahler form multiplied by ``factor``."""
        return build_base(self.resolution, self.vol * factor, radius=self.radius)

    def evaluate(self, func):
        """Evaluate ``func(point_on_sphere_as_z)`` at every node.

        ``func`` receives the z-coordinate of each node (``1/w`` on the
        w-chart; the pole ``w = 0`` is passed as ``inf``).
        """
        z = np.empty(self.shape, dtype=complex)
        z[0] = self.coords[0]
        with np.errstate(divide="ignore", invalid="ignore"):
            z[1] = np.where(self.coords[1] == 0, np.inf, 1.0 / self.coords[1])
        return np.asarray(func(z))

    def sync(self, values):
        """Overwrite exterior-node values by interpolation from the opposite chart."""
        values = np.asarray(values)
        flat = values.reshape(-1).copy()
        ext = self.exterior_index
        if np.iscomplexobj(flat):
            rhs = self._interp[:, self.interior_index] @ flat[self.interior_index]
            flat[ext] = self._sync_lu.solve(rhs.real) + 1j * self._sync_lu.solve(rhs.imag)
        else:
            rhs = self._interp[:, self.interior_index] @ flat[self.interior_index]
            flat[ext] = self._sync_lu.solve(rhs)
        return flat.reshape(values.shape)


def build_base(resolution, vol=1.0, radius=CHART_RADIUS):
    """Build the two-chart sphere with ``resolution`` nodes per chart axis."""
    if int(resolution) != resolution or resolution < MIN_RESOLUTION:
        raise ConfigurationError(
            f"resolution must be an integer >= {MIN_RESOLUTION}, got {resolution!r}")
    if not vol > 0:
        raise ConfigurationError(f"vol must be positive, got {vol!r}")
    n = int(resolution)
    x = np.linspace(-radius, radius, n)
    h = x[1] - x[0]
    if INTERIOR_RADIUS > radius - h:
        raise ConfigurationError("grid too coarse for the interior radius")
    X, Y = np.meshgrid(x, x, indexing="ij")
    chart = X + 1j * Y
    coords = np.stack([chart, chart])
    omega = fubini_study_coeff(coords, vol)
    blend = blend_weight(coords, radius)
    quad = blend * omega * h * h

    ii, jj = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    inner = (ii > 0) & (ii < n - 1) & (jj > 0) & (jj < n - 1)
    interior = np.stack([inner & (np.abs(chart) <= INTERIOR_RADIUS)] * 2)

    interp = _interpolation_matrix(coords, interior, x[0], h)
    ext = np.flatnonzero(~interior.ravel())
    w_ee = interp[:, ext]
    sync_lu = spla.splu((sp.identity(len(ext), format="csc") - w_ee).tocsc())
    fd = _five_point_matrix(n, interior, h)
    return BaseGeometry(n, float(vol), float(radius), float(h), coords, omega, blend,
                        quad, interior, interp, sync_lu, fd)


def _interpolation_matrix(coords, interior, x0, h):
    n = coords.shape[1]
    ext = np.flatnonzero(~interior.ravel())
    c, i, j = np.unravel_index(ext, coords.shape)
    target = 1.0 / coords[c, i, j]
    other = 1 - c
    tx = (target.real - x0) / h
    ty = (target.imag - x0) / h
    bx = np.clip(np.floor(tx).astype(int) - 1, 0, n - 4)
    by = np.clip(np.floor(ty).astype(int) - 1, 0, n - 4)
    wx = _cubic_weights(tx - bx)
    wy = _cubic_weights(ty - by)
    rows, cols, vals = [], [], []
    for a in range(4):
        for b in range(4):
            rows.append(np.arange(len(ext)))
            cols.append(np.ravel_multi_index((other, bx + a, by + b), coords.shape))
            vals.append(wx[:, a] * wy[:, b])
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(len(ext), coords.size))


def _five_point_matrix(n, interior, h):
    idx = np.flatnonzero(interior.ravel())
    shape = interior.shape
    c, i, j = np.unravel_index(idx, shape)
    rows = np.arange(len(idx))
    entries = [(np.ravel_multi_index((c, i, j), shape), -4.0)]
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        entries.append((np.ravel_multi_index((c, i + di, j + dj), shape), 1.0))
    r = np.concatenate([rows] * 5)
    col = np.concatenate([e[0] for e in entries])
    val = np.concatenate([np.full(len(idx), e[1]) for e in entries]) / (h * h)
    return sp.csr_matrix((val, (r, col)), shape=(len(idx), interior.size))


def flat_laplacian(values, geom):
    """Five-point flat Laplacian of chart-local data at interior nodes (NaN elsewhere)."""
    out = np.full(geom.shape, np.nan, dtype=np.result_type(values, float))
    out.reshape(-1)[geom.interior_index] = geom.fd_matrix @ np.asarray(values).reshape(-1)
    return out


def laplacian(u, geom):
    """Negative-semidefinite Kahler Laplacian of a scalar field.

    ``laplacian(u) = (u_xx + u_yy) / g`` in either chart.  A line-bundle
    metric ``h * exp(2u)`` has ``i Lambda F = i Lambda F_h - laplacian(u)``.
    """
    lap = flat_laplacian(u, geom) / geom.omega_coeff
    return geom.sync(np.where(geom.interior, lap, 0.0))


def contracted_log_curvature(log_metric, geom):
    """``i Lambda F`` of a line-bundle metric given by chart-local ``log h``.

    ``log_metric`` must be expressed in holomorphic frames of each chart;
    only interior values of the result are computed directly.
    """
    ratio = -0.5 * flat_laplacian(log_metric, geom) / geom.omega_coeff
    return geom.sync(np.where(geom.interior, ratio, 0.0))


def fd_dz(values, geom):
    """Centered ``d/dz = (d/dx - i d/dy) / 2`` of chart-local data (NaN off the stencil interior)."""
    h = geom.spacing
    out = np.full(geom.shape, np.nan, dtype=complex)
    dx = (values[:, 2:, 1:-1] - values[:, :-2, 1:-1]) / (2 * h)
    dy = (values[:, 1:-1, 2:] - values[:, 1:-1, :-2]) / (2 * h)
    out[:, 1:-1, 1:-1] = 0.5 * (dx - 1j * dy)
    return out


@dataclass(frozen=True)
class TwoForm:
    """(1,1)-form stored as coefficients of ``(i/2) dzeta ^ dzetabar`` per chart."""

    coeff: np.ndarray

    def __add__(self, other):
        return TwoForm(self.coeff + other.coeff)

    def __sub__(self, other):
        return TwoForm(self.coeff - other.coeff)

    def __mul__(self, scalar):
        return TwoForm(self.coeff * scalar)

    __rmul__ = __mul__


def kahler_form(geom):
    return TwoForm(geom.omega_coeff.astype(complex))


def contract(alpha, geom):
    """Pointwise contraction with the Kahler form (``Lambda omega == 1``)."""
    coeff = alpha.coeff if isinstance(alpha, TwoForm) else np.asarray(alpha)
    if coeff.shape != geom.shape:
        raise ValueError(f"field shape {coeff.shape} does not match grid {geom.shape}")
    return coeff / geom.omega_coeff


def integrate(f, geom):
    """Integral of a scalar field against the volume form."""
    f = np.asarray(f)
    if f.shape != geom.shape:
        raise ValueError(f"field shape {f.shape} does not match grid {geom.shape}")
    return np.sum(geom.quad_weights * f)

