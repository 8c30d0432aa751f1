"""Coupled vortex equations for a line-bundle triple over the sphere.

Unknowns are the conformal potentials ``u1, u2`` of ``h_i = background(d_i) e^{2 u_i}``.
The discrete system has one row per node: interior nodes carry the PDE,
exterior nodes carry the chart-overlap condition ``u_E = W u``.

Since ``|Phi|^2`` depends only on ``u1 - u2``, the shift ``(u1, u2) -> (u1 + c, u2 + c)``
is always a symmetry; it is removed by fixing ``integral(u1 + u2) = 0``.  With
``Phi = 0`` the fields decouple and both means are fixed.  The constraints enter
through a bordered Newton matrix whose multipliers absorb the matching
cokernel directions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .kahler_base import ConfigurationError, integrate
from .line_bundles import (HolomorphicSection, LineBundleMetric, contracted_curvature,
                           section_norm_sq)

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 200
DEFAULT_RESOLUTION = 64
STAGNATION_WINDOW = 10
FLOW_ATTEMPTS = 4


@dataclass(frozen=True, eq=False)
class HolomorphicTriple:
    """Line bundles O(d1), O(d2) with ``phi: O(d2) -> O(d1)`` and parameters tau.

    If ``tau2`` is omitted it is derived from ``tau1 + tau2 = 2 pi (d1 + d2) / vol``.
    """

    d1: int
    d2: int
    phi: HolomorphicSection
    tau1: float
    geom: object
    tau2: float = None

    def __post_init__(self):
        if (self.phi.target_degree, self.phi.source_degree) != (self.d1, self.d2):
            raise ConfigurationError(
                f"phi maps O({self.phi.source_degree}) -> O({self.phi.target_degree}); "
                f"expected O({self.d2}) -> O({self.d1})")
        total = 2.0 * math.pi * (self.d1 + self.d2) / self.geom.vol
        tau1 = float(self.tau1)
        if self.tau2 is None:
            object.__setattr__(self, "tau2", total - tau1)
        else:
            tau2 = float(self.tau2)
            if abs(tau1 + tau2 - total) > 1e-12 * max(1.0, abs(total)):
                raise ConfigurationError(
                    f"tau1 + tau2 = {tau1 + tau2!r} but the degrees require {total!r}")
            object.__setattr__(self, "tau2", tau2)
        object.__setattr__(self, "tau1", tau1)

    def metrics(self, u1, u2):
        return (LineBundleMetric(self.d1, np.asarray(u1, dtype=float), self.geom),
                LineBundleMetric(self.d2, np.asarray(u2, dtype=float), self.geom))

    def phi_norm_sq(self, u1, u2):
        return section_norm_sq(self.phi, *self.metrics(u1, u2))

    @property
    def required_phi_integral(self):
        """Value of ``integral |Phi|^2`` forced by integrating the first equation."""
        return self.tau1 * self.geom.vol - 2.0 * math.pi * self.d1


def vortex_residual(t, u1, u2):
    """Pointwise ``(i Lambda F1 + |Phi|^2 - tau1, i Lambda F2 - |Phi|^2 - tau2)``."""
    u1, u2 = np.asarray(u1, dtype=float), np.asarray(u2, dtype=float)
    if u1.shape != t.geom.shape or u2.shape != t.geom.shape:
        raise ValueError("potential shapes do not match the grid")
    m1, m2 = t.metrics(u1, u2)
    p = section_norm_sq(t.phi, m1, m2)
    return (contracted_curvature(m1) + p - t.tau1,
            contracted_curvature(m2) - p - t.tau2)


def _operator_block(geom):
    # rows in node order: interior -> -laplacian, exterior -> u_E - W u
    n = geom.size
    ii, ee = geom.interior_index, geom.exterior_index
    lap = sp.diags(1.0 / geom.omega_coeff.ravel()[ii]) @ geom.fd_matrix
    rows_i = sp.csr_matrix((np.ones(len(ii)), (ii, np.arange(len(ii)))), shape=(n, len(ii)))
    rows_e = sp.csr_matrix((np.ones(len(ee)), (ee, np.arange(len(ee)))), shape=(n, len(ee)))
    sel_e = sp.csr_matrix((np.ones(len(ee)), (np.arange(len(ee)), ee)), shape=(len(ee), n))
    return (rows_i @ (-lap) + rows_e @ (sel_e - geom.interp_matrix)).tocsr()


def linearization(t, u1, u2):
    """Sparse derivative of the interior residuals with respect to all nodal values.

    Rows are the interior rows of field 1 followed by those of field 2; columns
    are the full ``u1`` followed by the full ``u2``.
    """
    geom = t.geom
    ii = geom.interior_index
    lap = sp.diags(1.0 / geom.omega_coeff.ravel()[ii]) @ geom.fd_matrix
    two_p = 2.0 * t.phi_norm_sq(u1, u2).ravel()
    sel = sp.csr_matrix((two_p[ii], (np.arange(len(ii)), ii)), shape=(len(ii), geom.size))
    return sp.bmat([[-lap + sel, -sel], [-sel, -lap + sel]], format="csr")


def apply_linearization(t, u1, u2, v1, v2):
    """Directional derivative of :func:`vortex_residual` along ``(v1, v2)``."""
    geom = t.geom
    d = linearization(t, u1, u2) @ np.concatenate([np.ravel(v1), np.ravel(v2)])
    ni = len(geom.interior_index)
    out = []
    for part in (d[:ni], d[ni:]):
        full = np.zeros(geom.size)
        full[geom.interior_index] = part
        out.append(geom.sync(full.reshape(geom.shape)))
    return tuple(out)


@dataclass
class SolveReport:
    converged: bool
    iterations: int
    final_residual_sup: float
    integral_identity_gap: float
    potentials: tuple
    status: str = "converged"
    message: str = ""
    phi_integral: float = float("nan")
    required_phi_integral: float = float("nan")
    trace: list = field(default_factory=list)
    steps: list = field(default_factory=list)
    tol: float = DEFAULT_TOL


class _System:
    """Bordered Newton system for the discrete vortex equations."""

    def __init__(self, t):
        self.t = t
        g = t.geom
        self.n = g.size
        self.ii = g.interior_index
        self.block = _operator_block(g)
        w = g.quad_weights.ravel()
        zeros = np.zeros(self.n)
        on_i = np.zeros(self.n)
        on_i[self.ii] = 1.0
        if t.phi.is_zero:
            self.constraints = [np.concatenate([w, zeros]), np.concatenate([zeros, w])]
            self.borders = [np.concatenate([on_i, zeros]), np.concatenate([zeros, on_i])]
        else:
            self.constraints = [np.concatenate([w, w])]
            self.borders = [np.concatenate([on_i, on_i])]
        self.m = len(self.constraints)
        self.pde_mask = np.concatenate([on_i, on_i]).astype(bool)

    def split(self, x):
        u = x[: 2 * self.n]
        return (u[: self.n].reshape(self.t.geom.shape), u[self.n:].reshape(self.t.geom.shape),
                x[2 * self.n:])

    def residual(self, x):
        u1, u2, mu = self.split(x)
        r1, r2 = vortex_residual(self.t, u1, u2)
        g = np.concatenate([r1.ravel(), r2.ravel()])
        u = x[: 2 * self.n]
        ext = np.concatenate([self.block @ u[: self.n], self.block @ u[self.n:]])
        g = np.where(self.pde_mask, g, ext)
        for b, mult in zip(self.borders, mu):
            g = g + b * mult
        con = np.array([c @ u for c in self.constraints])
        return np.concatenate([g, con])

    def matrix(self, x, shift=0.0):
        u1, u2, _ = self.split(x)
        n = self.n
        two_p = np.zeros(n)
        two_p[self.ii] = 2.0 * self.t.phi_norm_sq(u1, u2).ravel()[self.ii]
        if shift:
            two_p_diag = two_p + np.where(self.pde_mask[:n], shift, 0.0)
        else:
            two_p_diag = two_p
        p = sp.diags(two_p)
        jac = sp.bmat([[self.block + sp.diags(two_p_diag), -p],
                       [-p, self.block + sp.diags(two_p_diag)]])
        border = sp.csc_matrix(np.stack(self.borders, axis=1))
        cons = sp.csr_matrix(np.stack(self.constraints))
        return sp.bmat([[jac, border], [cons, None]], format="csc")

    def merit(self, gvec):
        return float(np.max(np.abs(gvec)))


def _measure(t, u1, u2):
    r1, r2 = vortex_residual(t, u1, u2)
    inner = t.geom.interior
    sup = float(max(np.max(np.abs(r1[inner])), np.max(np.abs(r2[inner]))))
    phi_int = float(integrate(t.phi_norm_sq(u1, u2), t.geom))
    return sup, phi_int


def solve(t, init=None, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Damped Newton with a pseudo-transient fallback.

    Returns a :class:`SolveReport`; failure to converge (including NaN or
    overflow) is reported, never raised.
    """
    if not tol > 0:
        raise ConfigurationError(f"tol must be positive, got {tol!r}")
    if int(max_iter) != max_iter or max_iter < 0:
        raise ConfigurationError(f"max_iter must be a non-negative integer, got {max_iter!r}")
    geom = t.geom
    if init is None:
        init = (np.zeros(geom.shape), np.zeros(geom.shape))
    u1, u2 = (np.asarray(a, dtype=float) for a in init)
    if u1.shape != geom.shape or u2.shape != geom.shape:
        raise ConfigurationError("initial potentials do not match the grid")

    sysm = _System(t)
    x = np.concatenate([u1.ravel(), u2.ravel(), np.zeros(sysm.m)])
    trace, steps = [], []
    dt = 1.0
    status, message = "max_iter", f"no convergence within {max_iter} iterations"
    it = 0
    with np.errstate(over="ignore", invalid="ignore"):
        gvec = sysm.residual(x)
        merit = sysm.merit(gvec)
        trace.append(merit)
        best = merit
        best_at = 0
        while True:
            if not np.isfinite(merit):
                status, message = "numerical_failure", f"non-finite residual at iteration {it}"
                break
            if merit < tol:
                status, message = "converged", ""
                break
            if it >= max_iter:
                break
            it += 1
            try:
                delta = spla.splu(sysm.matrix(x)).solve(-gvec)
            except RuntimeError:
                delta = None
            accepted = False
            if delta is not None and np.all(np.isfinite(delta)):
                alpha = 1.0
                for _ in range(12):
                    trial = x + alpha * delta
                    g_trial = sysm.residual(trial)
                    m_trial = sysm.merit(g_trial)
                    if np.isfinite(m_trial) and m_trial <= (1.0 - 1e-4 * alpha) * merit:
                        accepted = True
                        steps.append(("newton", alpha))
                        break
                    alpha *= 0.5
            if not accepted:
                # gradient-flow step: (J + I/dt) delta = -G on PDE rows
                trial, g_trial, m_trial = x, gvec, merit
                for _ in range(FLOW_ATTEMPTS):
                    try:
                        d = spla.splu(sysm.matrix(x, shift=1.0 / dt)).solve(-gvec)
                    except RuntimeError:
                        d = None
                    if d is not None and np.all(np.isfinite(d)):
                        cand = x + d
                        g_c = sysm.residual(cand)
                        m_c = sysm.merit(g_c)
                        if np.isfinite(m_c) and m_c < merit:
                            trial, g_trial, m_trial = cand, g_c, m_c
                            steps.append(("flow", dt))
                            dt *= 2.0
                            break
                    dt *= 0.25
                else:
                    steps.append(("flow-rejected", dt))
                    status = "stagnated"
                    message = f"no descent direction at iteration {it}; residual {merit:.3e}"
                    break
            x, gvec, merit = trial, g_trial, m_trial
            trace.append(merit)
            if merit < 0.99 * best:
                best, best_at = merit, it
            elif it - best_at >= STAGNATION_WINDOW:
                status = "stagnated"
                message = f"residual stalled near {best:.3e} for {STAGNATION_WINDOW} iterations"
                break

    u1, u2, _ = sysm.split(x)
    u1, u2 = u1.copy(), u2.copy()
    with np.errstate(over="ignore", invalid="ignore"):
        if np.all(np.isfinite(x)):
            sup, phi_int = _measure(t, u1, u2)
        else:
            sup, phi_int = float("nan"), float("nan")
    converged = status == "converged" and sup < tol
    if status == "converged" and not converged:
        # the normalization multiplier absorbed a constant: no solution for these tau
        status, message = "unsolvable", f"constrained system solved but residual {sup:.3e} >= tol"
    return SolveReport(
        converged=converged, iterations=it, final_residual_sup=sup,
        integral_identity_gap=abs(phi_int - t.required_phi_integral),
        potentials=(u1, u2), status=status, message=message, phi_integral=phi_int,
        required_phi_integral=t.required_phi_integral, trace=trace, steps=steps, tol=tol)
