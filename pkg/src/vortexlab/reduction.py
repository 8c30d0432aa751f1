"""Rank-2 metric on X x P^1 built from a vortex triple, and its block curvature.

The total space is handled on a product chart: base-chart nodes times fiber-chart
nodes.  Every field used here is a finite sum of outer products
``base_array (x) fiber_array`` (:class:`ProductField`), which is exact for pullbacks
and for ``beta = pi^*Phi (x) eta``.  Reductions over the product grid are taken in
chunks of fiber nodes, restricted to interior nodes of both charts.

Two-forms on the product are stored per component ``(a, b)`` with ``a, b`` in
``{"x", "z"}`` as coefficients of ``(i/2) da ^ d(b)bar``.  The Kahler form is
``(i/2)(g_X dx^dxbar + sigma g_P dz^dzbar)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import fiber_geometry as fg
from .kahler_base import ConfigurationError, contract, fd_dz
from .line_bundles import curvature, section_norm_sq
from .parameters import PiMultiple
from .vortex_solver import HolomorphicTriple, vortex_residual

STRUCTURAL_TOL = 1e-10
PAIRING_TOL = 1e-12
ENVELOPE_FACTOR = 10.0
CHUNK = 256
COMPONENTS = ("xx", "xz", "zx", "zz")


class ProductField:
    """``sum_k outer(base_k, fiber_k)`` on the product of two chart grids."""

    def __init__(self, terms=()):
        self.terms = [(np.asarray(a), np.asarray(b)) for a, b in terms]

    @classmethod
    def pullback(cls, base_values, fiber_shape):
        return cls([(base_values, np.ones(fiber_shape))])

    @classmethod
    def fiberwise(cls, fiber_values, base_shape):
        return cls([(np.ones(base_shape), fiber_values)])

    def __add__(self, other):
        return ProductField(self.terms + other.terms)

    def __neg__(self):
        return ProductField([(-a, b) for a, b in self.terms])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, scalar):
        return ProductField([(scalar * a, b) for a, b in self.terms])

    __rmul__ = __mul__

    def scale_base(self, arr):
        return ProductField([(a * arr, b) for a, b in self.terms])

    def scale_fiber(self, arr):
        return ProductField([(a, b * arr) for a, b in self.terms])

    def real(self):
        # Re(ab) = Re a Re b - Im a Im b
        out = []
        for a, b in self.terms:
            out.append((a.real, b.real))
            if np.iscomplexobj(a) and np.iscomplexobj(b):
                out.append((-a.imag, b.imag))
        return ProductField(out)

    def at(self, base_index, fiber_index):
        """Values at paired flat node indices."""
        return sum(a.reshape(-1)[base_index] * b.reshape(-1)[fiber_index]
                   for a, b in self.terms)

    def blocks(self, base_index, fiber_index, chunk=CHUNK):
        """Dense value blocks ``(len(base_index), <= chunk)`` over the selected nodes."""
        flat = [(a.reshape(-1)[base_index], b.reshape(-1)) for a, b in self.terms]
        for start in range(0, len(fiber_index), chunk):
            sel = fiber_index[start:start + chunk]
            val = np.zeros((len(base_index), len(sel)),
                           dtype=np.result_type(*[a for a, _ in flat], *[b for _, b in flat], float))
            for a, b in flat:
                val += np.outer(a, b[sel])
            yield val

    def sup(self, base_index, fiber_index):
        if not self.terms:
            return 0.0
        return float(max(np.max(np.abs(v)) for v in self.blocks(base_index, fiber_index)))

    def fiber_spread(self, base_index, fiber_index):
        """``max_x (max_z f - min_z f)`` of a real field: deviation from fiber-constancy."""
        if not self.terms:
            return 0.0
        lo = np.full(len(base_index), np.inf)
        hi = np.full(len(base_index), -np.inf)
        for v in self.real().blocks(base_index, fiber_index):
            lo = np.minimum(lo, v.min(axis=1))
            hi = np.maximum(hi, v.max(axis=1))
        return float(np.max(hi - lo))


@dataclass(frozen=True)
class ProductTwoForm:
    """(1,1)-form on a product chart; missing components are zero."""

    comps: dict

    def get(self, key):
        return self.comps.get(key, ProductField())

    def __neg__(self):
        return ProductTwoForm({k: -v for k, v in self.comps.items()})

    def __add__(self, other):
        keys = set(self.comps) | set(other.comps)
        return ProductTwoForm({k: self.get(k) + other.get(k) for k in keys})

    def __sub__(self, other):
        return self + (-other)


def _dxdzbar_to_std(coeff):
    # d(a)^d(b)bar = -2i (i/2) d(a)^d(b)bar
    return -2j * coeff


@dataclass(frozen=True, eq=False)
class AssembledMetric:
    """``h = pi^*h1 (+) pi^*h2 (x) k`` with second fundamental form ``beta = pi^*Phi (x) eta``."""

    base: object
    fiber: fg.FiberData
    m1: object
    m2: object
    phi: object
    lam: PiMultiple
    params: object
    triple: HolomorphicTriple = field(repr=False)
    fiber_curvature: str = "analytic"

    @property
    def sigma(self):
        return self.fiber.sigma

    @property
    def base_index(self):
        return self.base.interior_index

    @property
    def fiber_index(self):
        return self.fiber.fiber_geom.interior_index

    def inverse_metric(self):
        """Inverse of the block-diagonal product metric, entries keyed like components.

        Base entries are arrays on the base grid, fiber entries on the fiber grid;
        the mixed entries vanish because the metric has no ``dx^dzbar`` part.
        """
        gx = self.base.omega_coeff
        gz = self.sigma * self.fiber.fiber_geom.omega_coeff
        return {"xx": 1.0 / gx, "zz": 1.0 / gz, "xz": 0.0, "zx": 0.0}

    def beta(self):
        """Coefficient of ``beta`` on ``dzbar`` in the frame of Hom(E2 (x) K^*, E1)."""
        fz = self.fiber.fiber_geom.coords
        return ProductField([(self.phi.chart_values(self.base),
                              fg.eta_coeff(fz, self.fiber.eta0))])


def assemble(base, fiber, m1, m2, phi, params, fiber_curvature="analytic"):
    """Build the product-chart data of the Hermitian metric attached to a triple.

    ``fiber_curvature`` selects how F_k enters the quotient block: ``"analytic"``
    or ``"fd"`` (finite differences of log k on the fiber grid).
    """
    if fiber_curvature not in ("analytic", "fd"):
        raise ConfigurationError(f"fiber_curvature must be 'analytic' or 'fd', got {fiber_curvature!r}")
    if params.n != 1:
        raise ConfigurationError("product-chart verification supports a curve base (n = 1)")
    if Fraction(fiber.sigma).limit_denominator(10**9) != params.sigma:
        raise ConfigurationError(f"fiber sigma {fiber.sigma} does not match params sigma {params.sigma}")
    if abs(base.vol - float(params.vol_x)) > 1e-12 * float(params.vol_x):
        raise ConfigurationError(f"base volume {base.vol} does not match params {params.vol_x}")
    if (m1.degree, m2.degree) != (params.d1, params.d2):
        raise ConfigurationError(
            f"metric degrees ({m1.degree}, {m2.degree}) do not match params ({params.d1}, {params.d2})")
    if m1.geom is not base or m2.geom is not base:
        raise ConfigurationError("metrics must live on the supplied base geometry")
    triple = HolomorphicTriple(m1.degree, m2.degree, phi, float(params.tau1), base,
                               tau2=float(params.tau2))
    return AssembledMetric(base, fiber, m1, m2, phi, params.lam, params, triple, fiber_curvature)


def _fiber_curvature_form(am):
    """F_k as a coefficient of ``(i/2) dz^dzbar``.

    ``analytic`` uses the exact curvature of the O(2) background, like the base
    backgrounds; ``fd`` differentiates ``log k`` on the fiber grid.
    """
    fgeom = am.fiber.fiber_geom
    if am.fiber_curvature == "analytic":
        return -4j / (1.0 + np.abs(fgeom.coords) ** 2) ** 2
    c_num = fg.fiber_curvature_field(1.0, fgeom)
    return -1j * fgeom.omega_coeff * c_num


def _log_ratio_dz(am):
    base = am.base
    x = base.coords
    k = am.phi.twist
    bg = -k * np.conj(x) / (1.0 + np.abs(x) ** 2)
    du = fd_dz(am.m1.potential - am.m2.potential, base)
    return bg + 2.0 * base.sync(np.where(base.interior, du, 0.0))


def block_curvature(am):
    """Blocks ``(F1 - beta^beta*, D'beta, -D''beta*, F2 (x) 1 + 1 (x) F_k - beta*^beta)``."""
    base, fgeom = am.base, am.fiber.fiber_geom
    bshape, fshape = base.shape, fgeom.shape
    fz = fgeom.coords
    eta0 = am.fiber.eta0
    p = section_norm_sq(am.phi, am.m1, am.m2)
    wedge = fg.eta_wedge_coeff(fz, am.fiber.eta0_sq)

    f1 = ProductField.pullback(curvature(am.m1).coeff, fshape)
    f2 = ProductField.pullback(curvature(am.m2).coeff, fshape)
    bb = ProductField([(p, wedge)])  # beta ^ beta*
    b11 = ProductTwoForm({"xx": f1, "zz": -bb})
    b22 = ProductTwoForm({"xx": f2,
                          "zz": ProductField.fiberwise(_fiber_curvature_form(am), bshape) + bb})

    phi_v = am.phi.chart_values(base)
    dphi = am.phi.derivative_values(base)
    f = fg.eta_coeff(fz, eta0)
    # D'eta along the fiber, exact formulas
    d_eta = fg.eta_coeff_dz(fz, eta0) + f * fg.k_dual_log_dz(fz)
    base_part = dphi + phi_v * _log_ratio_dz(am)
    b12 = ProductTwoForm({"xz": ProductField([(_dxdzbar_to_std(base_part), f)]),
                          "zz": ProductField([(phi_v, _dxdzbar_to_std(d_eta))])})

    # beta* = conj(Phi) (h1/h2) conj(f) |dz|^2 dz and D''beta* = dbar of it
    ratio = (1.0 + np.abs(base.coords) ** 2) ** (-am.phi.twist) * np.exp(
        2.0 * (am.m1.potential - am.m2.potential))
    adj_f = np.conj(f) * fg.k_dual(fz)
    adj_f_dzbar = np.conj(fg.eta_coeff_dz(fz, eta0)) * fg.k_dual(fz) + np.conj(f) * np.conj(
        fg.k_dual_log_dz(fz)) * fg.k_dual(fz)
    # dzbar^dz = -dz^dzbar and dxbar^dz = -dz^dxbar
    d2 = ProductTwoForm({
        "zx": ProductField([(-_dxdzbar_to_std(np.conj(ratio * base_part)), adj_f)]),
        "zz": ProductField([(np.conj(phi_v) * ratio, -_dxdzbar_to_std(adj_f_dzbar))]),
    })
    return {"11": b11, "12": b12, "21": -d2, "22": b22}


def contract_sigma(am, form):
    """``Lambda_sigma`` of a product (1,1)-form, summed over all four components."""
    ginv = am.inverse_metric()
    out = ProductField()
    for key in COMPONENTS:
        comp = form.get(key)
        if not comp.terms:
            continue
        w = ginv[key]
        if key == "xx":
            out = out + comp.scale_base(w)
        elif key == "zz":
            out = out + comp.scale_fiber(w)
        else:
            out = out + comp * w
    return out


def diagonal_residuals(am, blocks=None):
    """``i Lambda_sigma F_h - lambda`` on the two diagonal blocks (real fields)."""
    blocks = blocks or block_curvature(am)
    lam = float(am.lam)
    shift = ProductField.pullback(np.full(am.base.shape, lam), am.fiber.fiber_geom.shape)
    return tuple((contract_sigma(am, blocks[k]) * 1j).real() - shift for k in ("11", "22"))


@dataclass(frozen=True)
class Envelope:
    """Measured second-order error of the fiber curvature at two fiber grids."""

    grids: tuple
    errors: tuple
    order: float
    value: float


def measure_envelope(am):
    """O(spacing^2) envelope at the working fiber grid from a two-level convergence study."""
    n = am.fiber.fiber_geom.resolution
    reports = [fg.fiber_curvature_check(am.sigma, m) for m in (n, 2 * n)]
    e = [r.sup_error for r in reports]
    h = [r.spacing for r in reports]
    order = float(np.log(e[0] / e[1]) / np.log(h[0] / h[1]))
    const = max(e[0] / h[0] ** 2, e[1] / h[1] ** 2)
    return Envelope((n, 2 * n), tuple(e), order, const * h[0] ** 2)


@dataclass
class ReductionReport:
    block_residual_sup: tuple
    fiber_constancy: tuple
    vortex_deviation: tuple
    off_diagonal_sup: float
    mixed_component_sup: float
    envelope: Envelope
    fiber_constant_offset: float
    solver_tol: float = None
    verdicts: dict = field(default_factory=dict)
    lemma: object = None

    @property
    def passed(self):
        return all(self.verdicts.values())


def he_residual(am, solver_tol=None, envelope=None, with_lemma=True):
    """Compare ``i Lambda_sigma F_h - lambda I`` with the pulled-back vortex residuals.

    With ``solver_tol`` the potentials are taken to solve the vortex equations
    to that tolerance and the residual sup itself is also judged.
    """
    envelope = envelope or measure_envelope(am)
    blocks = block_curvature(am)
    res = diagonal_residuals(am, blocks)
    bi, fi = am.base_index, am.fiber_index
    fshape = am.fiber.fiber_geom.shape
    v1, v2 = vortex_residual(am.triple, am.m1.potential, am.m2.potential)
    # c - (lambda - tau2) is zero by the parameter algebra
    offset = float(am.params.c - (am.params.lam - am.params.tau2))
    dev = (res[0] - ProductField.pullback(v1, fshape),
           res[1] - ProductField.pullback(v2 + offset, fshape))
    sups = tuple(r.sup(bi, fi) for r in res)
    spread = tuple(r.fiber_spread(bi, fi) for r in res)
    devs = tuple(d.sup(bi, fi) for d in dev)
    off = max(contract_sigma(am, blocks[k]).sup(bi, fi) for k in ("12", "21"))
    mixed = max(blocks[k].get(c).sup(bi, fi) for k in ("12", "21") for c in ("xz", "zx"))
    bound = ENVELOPE_FACTOR * envelope.value
    verdicts = {
        "fiber_constancy": max(spread) < bound,
        "vortex_equivalence": max(devs) < bound,
        "off_diagonal_zero": off < STRUCTURAL_TOL,
        "parameter_offset_zero": offset == 0.0,
    }
    if solver_tol is not None:
        verdicts["he_residual_small"] = max(sups) < ENVELOPE_FACTOR * solver_tol + envelope.value
    lemma = lemma52_checks(am, blocks) if with_lemma else None
    if lemma is not None:
        verdicts.update({f"lemma_{k}": v for k, v in lemma.verdicts.items()})
    return ReductionReport(sups, spread, devs, off, mixed, envelope, offset, solver_tol,
                           verdicts, lemma)


@dataclass
class LemmaReport:
    contraction_d_prime_beta: float
    contraction_d_dprime_beta_adj: float
    pullback_contraction_gap: tuple
    mixed_pairing_sup: float
    verdicts: dict


def _random_base_forms(base, count, rng):
    # smooth (1,1)-forms on the sphere: g * (random polynomial in the embedding)
    z = base.evaluate(lambda q: q)
    r2 = np.where(np.isinf(z), np.inf, np.abs(z) ** 2)
    with np.errstate(invalid="ignore"):
        x1 = np.where(np.isinf(z), 0.0, 2 * np.nan_to_num(z).real / (1 + r2))
        x2 = np.where(np.isinf(z), 0.0, 2 * np.nan_to_num(z).imag / (1 + r2))
        x3 = np.where(np.isinf(z), 1.0, (r2 - 1) / (r2 + 1))
    forms = []
    for _ in range(count):
        c = rng.normal(size=7) + 1j * rng.normal(size=7)
        f = c[0] + c[1] * x1 + c[2] * x2 + c[3] * x3 + c[4] * x1 * x3 + c[5] * np.cos(x2) + c[6] * x1 ** 2
        forms.append(f * base.omega_coeff)
    return forms


def mixed_pairing(am, alpha_coeff, base_index, fiber_index):
    """Pointwise inner product of ``pi^*alpha`` with the fiber Kahler form.

    ``<a, b> = sum g^{p qbar} conj(g^{r sbar}) a_{p sbar} conj(b_{q rbar})`` with the
    inverse metric formed from the 2x2 product metric at each sample point.
    """
    gx = am.base.omega_coeff.reshape(-1)[base_index]
    gz = am.sigma * am.fiber.fiber_geom.omega_coeff.reshape(-1)[fiber_index]
    out = np.empty(len(base_index), dtype=complex)
    for k, (gb, gf, a) in enumerate(zip(gx, gz, alpha_coeff.reshape(-1)[base_index])):
        ginv = np.linalg.inv(np.array([[gb, 0.0], [0.0, gf]]))
        alpha = np.array([[a, 0.0], [0.0, 0.0]])
        omega = np.array([[0.0, 0.0], [0.0, gf / am.sigma]])
        total = 0j
        for p in range(2):
            for q in range(2):
                for r in range(2):
                    for s in range(2):
                        total += ginv[p, q] * np.conj(ginv[r, s]) * alpha[p, s] * np.conj(omega[q, r])
        out[k] = total
    return out


def lemma52_checks(am, blocks=None, n_forms=20, n_points=64, seed=0):
    """Structural identities of the second fundamental form and the pulled-back curvature."""
    blocks = blocks or block_curvature(am)
    bi, fi = am.base_index, am.fiber_index
    fshape = am.fiber.fiber_geom.shape
    item2 = contract_sigma(am, blocks["12"]).sup(bi, fi)
    item3 = contract_sigma(am, blocks["21"]).sup(bi, fi)
    gaps = []
    for m in (am.m1, am.m2):
        form = ProductTwoForm({"xx": ProductField.pullback(curvature(m).coeff, fshape)})
        lhs = contract_sigma(am, form)
        rhs = ProductField.pullback(contract(curvature(m), am.base), fshape)
        gaps.append((lhs - rhs).sup(bi, fi))
    rng = np.random.default_rng(seed)
    pb = rng.choice(bi, n_points)
    pf = rng.choice(fi, n_points)
    pairing = max(float(np.max(np.abs(mixed_pairing(am, a, pb, pf))))
                  for a in _random_base_forms(am.base, n_forms, rng))
    verdicts = {
        "d_prime_beta": item2 < STRUCTURAL_TOL,
        "d_dprime_beta_adj": item3 < STRUCTURAL_TOL,
        "pullback_contraction": max(gaps) < STRUCTURAL_TOL,
        "mixed_pairing": pairing < PAIRING_TOL,
    }
    return LemmaReport(item2, item3, tuple(gaps), pairing, verdicts)
