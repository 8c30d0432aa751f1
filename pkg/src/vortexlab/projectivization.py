"""Projectivized rank-2 bundles: flatness admissibility and tautological degrees."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

import numpy as np

from .kahler_base import build_base, contracted_log_curvature
from .line_bundles import background_log_metric
from .parameters import DomainError, PiMultiple, as_fraction, deg_sigma_pullback
from .reduction import ProductField

KINDS = ("split", "stable")


class SpecError(ValueError):
    """Inconsistent projective bundle description."""


@dataclass(frozen=True)
class ProjectiveBundleSpec:
    """Data of a rank-2 bundle E over an n-dimensional base.

    ``split``: E = L1 (+) L2, given by integer degrees ``(a1, a2)`` over a curve, or
    by first Chern classes ``c1`` (coordinate vectors in a fixed basis of H^2)
    together with the total ``degree`` when n >= 2.
    ``stable``: stability is supplied as a flag; for n >= 2 the pairings of
    ``c1^2`` and ``c2`` with ``omega^(n-2)`` are required.
    """

    kind: str
    n: int = 1
    vol_x: Fraction = Fraction(1)
    degrees: tuple = None
    c1: tuple = None
    degree: Fraction = None
    stable: bool = None
    c1_sq_pairing: Fraction = None
    c2_pairing: Fraction = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SpecError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if int(self.n) != self.n or self.n < 1:
            raise SpecError(f"n must be a positive integer, got {self.n!r}")
        if as_fraction(self.vol_x) <= 0:
            raise SpecError(f"vol_x must be positive, got {self.vol_x}")
        split_data = self.degrees is not None or self.c1 is not None
        stable_data = (self.stable is not None or self.c1_sq_pairing is not None
                       or self.c2_pairing is not None)
        if self.kind == "split":
            if stable_data:
                raise SpecError("split spec carries stability data")
            if self.n == 1:
                if self.degrees is None or self.c1 is not None:
                    raise SpecError("split spec over a curve needs degrees (a1, a2) and no c1")
                if len(self.degrees) != 2 or any(int(a) != a for a in self.degrees):
                    raise SpecError(f"degrees must be two integers, got {self.degrees!r}")
                if self.degree is not None and as_fraction(self.degree) != sum(self.degrees):
                    raise SpecError(f"degree {self.degree} != a1 + a2 = {sum(self.degrees)}")
            else:
                if self.c1 is None or self.degrees is not None or len(self.c1) != 2:
                    raise SpecError("split spec over n >= 2 needs c1 = (c1(L1), c1(L2))")
                if len(self.c1[0]) != len(self.c1[1]):
                    raise SpecError("c1 vectors have different lengths")
                if self.degree is None:
                    raise SpecError("split spec over n >= 2 needs the total degree")
        else:
            if split_data:
                raise SpecError("stable spec carries split data")
            if self.stable is None or self.degree is None:
                raise SpecError("stable spec needs the stable flag and the degree")
            has_pairings = self.c1_sq_pairing is not None and self.c2_pairing is not None
            if self.n >= 2 and not has_pairings:
                raise SpecError("stable spec over n >= 2 needs c1^2 and c2 pairings")
            if self.n == 1 and (self.c1_sq_pairing is not None or self.c2_pairing is not None):
                raise SpecError("characteristic pairings against omega^(n-2) need n >= 2")

    @property
    def deg_e(self):
        if self.kind == "split" and self.n == 1:
            return Fraction(sum(self.degrees))
        return as_fraction(self.degree)


@dataclass(frozen=True)
class Admissibility:
    admissible: bool
    reason: str


def flatness_admissible(spec):
    """Whether P(E) carries a flat PU(2) structure."""
    if spec.kind == "split":
        if spec.n == 1:
            a1, a2 = spec.degrees
            ok = a1 == a2
            return Admissibility(ok, f"deg L1 = {a1}, deg L2 = {a2}: " +
                                 ("equal" if ok else "unequal, E is not polystable"))
        c1a = tuple(as_fraction(v) for v in spec.c1[0])
        c1b = tuple(as_fraction(v) for v in spec.c1[1])
        ok = c1a == c1b
        return Admissibility(ok, "c1(L1) = c1(L2)" if ok else "c1(L1) != c1(L2)")
    if not spec.stable:
        return Admissibility(False, "E is not stable")
    if spec.n == 1:
        return Admissibility(True, "stable rank-2 bundle over a curve")
    disc = as_fraction(spec.c1_sq_pairing) - 4 * as_fraction(spec.c2_pairing)
    ok = disc == 0
    return Admissibility(ok, f"(c1^2 - 4 c2) . omega^(n-2) = {disc}")


@dataclass(frozen=True)
class DegreeRecord:
    sigma: Fraction
    n: int
    vol_x: Fraction
    deg_e: Fraction
    taut: PiMultiple
    taut_pullback_form: PiMultiple
    k_star: PiMultiple
    powers: dict
    decomposition_ok: bool
    linear_in_k: bool


def _deg_power(k, n, sigma, deg_e, vol_x):
    return PiMultiple.of(k * (factorial(n) * vol_x - n * sigma * deg_e / 2))


def exact_degrees(spec, sigma, n=None, vol_x=None, ks=(-1, 0, 1, 2)):
    """Exact sigma-degrees of O_M(k), O_M(-1) and K*_{M/X} for M = P(E)."""
    sigma = as_fraction(sigma)
    if sigma <= 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    n = spec.n if n is None else n
    vol_x = as_fraction(spec.vol_x if vol_x is None else vol_x)
    deg_e = spec.deg_e
    taut = PiMultiple.of(n * sigma * deg_e / 2 - factorial(n) * vol_x)
    det_pullback = deg_sigma_pullback(n, sigma, deg_e)
    taut_b = det_pullback / 2 - factorial(n) * vol_x
    k_star = PiMultiple.of(2 * factorial(n) * vol_x)
    powers = {k: _deg_power(k, n, sigma, deg_e, vol_x) for k in ks}
    decomposition_ok = 2 * _deg_power(1, n, sigma, deg_e, vol_x) + det_pullback == k_star
    unit = _deg_power(1, n, sigma, deg_e, vol_x)
    linear = all(v == k * unit for k, v in powers.items()) and _deg_power(-1, n, sigma, deg_e, vol_x) == taut
    return DegreeRecord(sigma, n, vol_x, deg_e, taut, taut_b, k_star, powers, decomposition_ok, linear)


@dataclass(frozen=True)
class TautDegreeReport:
    a: int
    sigma: float
    grid: int
    numeric: float
    exact: float
    error: float
    base_term: float
    fiber_term: float
    fitted_fiber_constant: float


def taut_degree_report(a, sigma, grid):
    """Quadrature of ``(i/2 pi) F`` of O_M(-1) on P^1 x P^1 for E = O(a) (+) O(a).

    The metric on O_M(-1) at ``[xi]``, ``xi = (1, z)`` in a frame of E, is
    ``|xi|^2 = h_a(x) (1 + |z|^2)``.  Its curvature splits into the base term
    ``h(R xi0, xi0)`` for the unit vector ``xi0 = xi / |xi|`` and a fiber term;
    both are obtained from finite differences of the log-metric.
    """
    if grid < 32:
        raise ValueError("numeric_taut_degree needs grid >= 32")
    if not sigma > 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    base = build_base(grid, 1.0)
    fiber = build_base(grid, 1.0)
    sigma = float(sigma)

    # h(R xi0, xi0) with R = F_{h_a} (x) Id and xi0 = xi / |xi|_h
    fz = fiber.coords
    h_a = np.exp(background_log_metric(a, base))
    q = 1.0 + np.abs(fz) ** 2
    xi0_sq = ProductField([(h_a / h_a, q / q)])
    r_contracted = contracted_log_curvature(background_log_metric(a, base), base)
    base_pairing = xi0_sq.scale_base(r_contracted)

    # fiber direction of log|xi|^2
    fib = contracted_log_curvature(np.log1p(np.abs(fz) ** 2), fiber) / sigma
    total = base_pairing + ProductField.fiberwise(fib, base.shape)

    def integ(pf):
        # integral against omega_sigma^2 / 2 = sigma dvol_X dvol_P
        return sigma * sum(float(np.sum(base.quad_weights * a_) * np.sum(fiber.quad_weights * b_))
                           for a_, b_ in pf.terms)

    numeric = integ(total) / (2 * np.pi)
    base_term = integ(base_pairing) / (2 * np.pi)
    fiber_term = integ(ProductField.fiberwise(fib, base.shape)) / (2 * np.pi)
    exact = sigma * a - 1.0
    return TautDegreeReport(int(a), sigma, int(grid), numeric, exact, abs(numeric - exact),
                            base_term, fiber_term, -fiber_term)


def numeric_taut_degree(a, sigma, grid):
    """Numerical sigma-degree of O_M(-1) for M = P(O(a) (+) O(a)) over the unit-volume sphere."""
    return taut_degree_report(a, sigma, grid).numeric
