"""Hermitian metrics on line bundles O(d) over the sphere and polynomial sections."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kahler_base import TwoForm, contract, integrate, laplacian


def background_log_metric(degree, geom):
    """``log`` of the constant-curvature metric ``(1 + |zeta|^2)^(-d)`` in each chart frame."""
    return -degree * np.log1p(np.abs(geom.coords) ** 2)


@dataclass(frozen=True, eq=False)
class LineBundleMetric:
    """Metric ``background(degree) * exp(2 * potential)`` on O(degree)."""

    degree: int
    potential: np.ndarray
    geom: object

    def __post_init__(self):
        if np.shape(self.potential) != self.geom.shape:
            raise ValueError("potential does not match the grid")

    @classmethod
    def background(cls, degree, geom):
        return cls(int(degree), np.zeros(geom.shape), geom)

    def with_potential(self, potential):
        return LineBundleMetric(self.degree, np.asarray(potential, dtype=float), self.geom)


def curvature(m):
    """Curvature two-form of a line-bundle metric.

    The constant-curvature background contributes ``-2 i d / (1 + |zeta|^2)^2``
    exactly; the potential contributes ``i g laplacian(u)``, so that
    ``i Lambda F = 2 pi d / vol - laplacian(u)``.
    """
    geom = m.geom
    bg = -2j * m.degree / (1.0 + np.abs(geom.coords) ** 2) ** 2
    if not np.any(m.potential):
        return TwoForm(bg)
    return TwoForm(bg + 1j * geom.omega_coeff * laplacian(m.potential, geom))


def contracted_curvature(m):
    """Real scalar ``i Lambda F`` of the metric."""
    return (1j * contract(curvature(m), m.geom)).real


def chern_weil_degree(m):
    """Degree from quadrature of ``(i / 2 pi) F``."""
    return integrate(contracted_curvature(m), m.geom) / (2.0 * np.pi)


@dataclass(frozen=True)
class HolomorphicSection:
    """Section of Hom(O(d2), O(d1)) = O(d1 - d2) as a polynomial in z.

    ``coefficients[j]`` multiplies ``z**j``; in the w-chart the section is
    ``w**(d1-d2) * p(1/w)``, i.e. the reversed coefficient list.
    """

    source_degree: int
    target_degree: int
    coefficients: tuple = ()

    def __post_init__(self):
        k = self.target_degree - self.source_degree
        coeffs = tuple(complex(c) for c in self.coefficients)
        if k < 0:
            if any(coeffs):
                raise ValueError("a nonzero section needs target_degree >= source_degree")
            coeffs = ()
        elif not coeffs:
            coeffs = (0j,) * (k + 1)
        elif len(coeffs) != k + 1:
            raise ValueError(f"expected {k + 1} coefficients for O({k}), got {len(coeffs)}")
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def twist(self):
        return self.target_degree - self.source_degree

    @property
    def is_zero(self):
        return not any(self.coefficients)

    def scaled(self, c):
        return HolomorphicSection(self.source_degree, self.target_degree,
                                  tuple(c * a for a in self.coefficients))

    def chart_values(self, geom):
        """Values of the section in the holomorphic frame of each chart."""
        if self.is_zero:
            return np.zeros(geom.shape, dtype=complex)
        # np.polyval wants highest power first
        z_poly = self.coefficients[::-1]
        w_poly = self.coefficients
        return np.stack([np.polyval(z_poly, geom.coords[0]),
                         np.polyval(w_poly, geom.coords[1])])

    def derivative_values(self, geom):
        """Holomorphic derivative of the chart representative in each chart."""
        k = self.twist
        if self.is_zero or k == 0:
            return np.zeros(geom.shape, dtype=complex)
        z_poly = np.polyder(np.array(self.coefficients[::-1]))
        w_poly = np.polyder(np.array(self.coefficients))
        return np.stack([np.polyval(z_poly, geom.coords[0]),
                         np.polyval(w_poly, geom.coords[1])])


def section_norm_sq(phi, m1, m2):
    """Pointwise ``|Phi|^2`` in the metric ``h1 / h2`` on Hom(L2, L1)."""
    if phi.target_degree != m1.degree or phi.source_degree != m2.degree:
        raise ValueError(
            f"section maps O({phi.source_degree}) -> O({phi.target_degree}) but metrics "
            f"are on O({m2.degree}) and O({m1.degree})")
    geom = m1.geom
    vals = phi.chart_values(geom)
    return (np.abs(vals) ** 2 * (1.0 + np.abs(geom.coords) ** 2) ** (-phi.twist)
            * np.exp(2.0 * (m1.potential - m2.potential)))
