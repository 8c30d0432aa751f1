"""Exact parameter web: volumes, sigma-degrees, lambda, tau_1, tau_2 and c.

Every quantity is a rational multiple of an integer power of pi, represented by
:class:`PiMultiple`.  No floating point is used here.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial, pi


class DomainError(ValueError):
    """Input outside the domain of a formula (sigma <= 0, vol <= 0, rank 0, ...)."""


def as_fraction(value):
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError(f"exact input required, got float {value!r}")
    return Fraction(value)


@dataclass(frozen=True, order=False)
class PiMultiple:
    """The exact number ``coeff * pi**power``."""

    coeff: Fraction
    power: int = 0

    def __post_init__(self):
        object.__setattr__(self, "coeff", as_fraction(self.coeff))
        if self.coeff == 0:
            object.__setattr__(self, "power", 0)

    @classmethod
    def of(cls, value):
        return value if isinstance(value, PiMultiple) else cls(as_fraction(value), 0)

    def _same_power(self, other):
        other = PiMultiple.of(other)
        if self.coeff == 0:
            return Fraction(0), other.coeff, other.power
        if other.coeff == 0:
            return self.coeff, Fraction(0), self.power
        if self.power != other.power:
            raise ValueError(f"cannot add pi^{self.power} and pi^{other.power} exactly")
        return self.coeff, other.coeff, self.power

    def __add__(self, other):
        a, b, p = self._same_power(other)
        return PiMultiple(a + b, p)

    __radd__ = __add__

    def __neg__(self):
        return PiMultiple(-self.coeff, self.power)

    def __sub__(self, other):
        return self + (-PiMultiple.of(other))

    def __rsub__(self, other):
        return PiMultiple.of(other) - self

    def __mul__(self, other):
        other = PiMultiple.of(other)
        return PiMultiple(self.coeff * other.coeff, self.power + other.power)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = PiMultiple.of(other)
        if other.coeff == 0:
            raise ZeroDivisionError("division by exact zero")
        return PiMultiple(self.coeff / other.coeff, self.power - other.power)

    def __rtruediv__(self, other):
        return PiMultiple.of(other) / self

    def __eq__(self, other):
        try:
            other = PiMultiple.of(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.coeff == other.coeff and (self.coeff == 0 or self.power == other.power)

    def __hash__(self):
        return hash((self.coeff, self.power if self.coeff else 0))

    def __float__(self):
        return float(self.coeff) * pi ** self.power

    def __str__(self):
        c = self.coeff
        num = str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
        if c == 0 or self.power == 0:
            return num
        if self.power == 1:
            return f"{num}·π"
        return f"{num}·π^{self.power}"

    @classmethod
    def parse(cls, text):
        """Inverse of ``str``: ``"3/2·π"``, ``"-1·π"``, ``"5"``, ``"2·π^-1"``."""
        text = text.strip()
        if "·π" not in text:
            return cls(Fraction(text), 0)
        num, _, rest = text.partition("·π")
        power = int(rest[1:]) if rest.startswith("^") else 1
        if rest and not rest.startswith("^"):
            raise ValueError(f"malformed exact value {text!r}")
        return cls(Fraction(num), power)


PI = PiMultiple(1, 1)
FIBER_VOLUME = Fraction(1)


def slope(deg, rank):
    """mu = deg / rank."""
    rank = as_fraction(rank)
    if rank <= 0 or rank.denominator != 1:
        raise DomainError(f"rank must be a positive integer, got {rank}")
    return PiMultiple.of(deg) / rank


def vol_sigma(sigma, vol_x):
    """Volume of M for the weighted form pi^*omega_X + sigma * omega_fiber."""
    return PiMultiple.of(as_fraction(sigma) * as_fraction(vol_x) * FIBER_VOLUME)


def deg_sigma_pullback(n, sigma, degree):
    """deg_sigma(pi^* V) = n * sigma * deg(V)."""
    return PiMultiple.of(n * as_fraction(sigma) * as_fraction(degree))


def deg_sigma_fiber_power(k, n, vol_x):
    """deg_sigma of the extension of O(2k) from the fiber: 2k n! Vol(X)."""
    return PiMultiple.of(2 * as_fraction(k) * factorial(n) * as_fraction(vol_x))


def _check_domain(n, vol_x, sigma):
    if int(n) != n or n < 1:
        raise DomainError(f"base dimension n must be a positive integer, got {n}")
    if as_fraction(sigma) <= 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    if as_fraction(vol_x) <= 0:
        raise DomainError(f"Vol(X) must be positive, got {vol_x}")


def fiber_he_constant(sigma, n, vol_x):
    """Constant value of i Lambda_sigma F for the extended fiber metric on O(2)."""
    _check_domain(n, vol_x, sigma)
    return 2 * PI * deg_sigma_fiber_power(1, n, vol_x) / (factorial(n) * vol_sigma(sigma, vol_x))


@dataclass(frozen=True)
class ParameterRecord:
    n: int
    vol_x: Fraction
    sigma: Fraction
    d1: Fraction
    d2: Fraction
    r1: int
    r2: int
    vol_sigma: PiMultiple
    deg_sigma_pullback_1: PiMultiple
    deg_sigma_quotient: PiMultiple
    deg_sigma_K_star: PiMultiple
    deg_sigma_E: PiMultiple
    lam: PiMultiple
    tau1: PiMultiple
    tau2: PiMultiple
    c: PiMultiple
    slope_E: PiMultiple

    def as_items(self):
        """Ordered (name, exact value) pairs for reports."""
        names = ["n", "vol_x", "sigma", "d1", "d2", "r1", "r2", "vol_sigma",
                 "deg_sigma_pullback_1", "deg_sigma_quotient", "deg_sigma_K_star",
                 "deg_sigma_E", "lam", "tau1", "tau2", "c", "slope_E"]
        return [(name, PiMultiple.of(getattr(self, name))) for name in names]


def derive(n, vol_x, sigma, d1, d2, r1=1, r2=1):
    """Exact parameters for the extension 0 -> pi^*E1 -> E -> pi^*E2 (x) K^* -> 0."""
    _check_domain(n, vol_x, sigma)
    sigma, vol_x = as_fraction(sigma), as_fraction(vol_x)
    d1, d2 = as_fraction(d1), as_fraction(d2)
    for r in (r1, r2):
        if int(r) != r or r < 1:
            raise DomainError(f"ranks must be positive integers, got {r}")
    vs = vol_sigma(sigma, vol_x)
    sub = deg_sigma_pullback(n, sigma, d1)
    k_star = deg_sigma_fiber_power(1, n, vol_x)
    quotient = deg_sigma_pullback(n, sigma, d2) + r2 * k_star
    deg_e = sub + quotient
    rank = r1 + r2
    lam = 2 * PI / (factorial(n) * vs) * deg_e / rank
    tau1 = lam
    tau2 = lam - 2 * PI / (factorial(n) * vs) * k_star
    c = fiber_he_constant(sigma, n, vol_x)
    return ParameterRecord(int(n), vol_x, sigma, d1, d2, int(r1), int(r2), vs, sub, quotient,
                           k_star, deg_e, lam, tau1, tau2, c, slope(deg_e, rank))


def sigma_from_taus_literal(rec):
    """Unsimplified middle expression for 1/sigma in terms of tau1, ranks and degrees."""
    n, vol = rec.n, rec.vol_x
    numer = (rec.r1 + rec.r2) * rec.tau1 * vol / (2 * PI) - (rec.d1 + rec.d2) / factorial(n - 1)
    return numer / (2 * rec.r2 * vol)


@dataclass(frozen=True)
class Verdict:
    name: str
    passed: bool
    detail: str


def verify_consistency(rec):
    """Exact checks of the tau constraint, the sigma relation, the degree chain and c."""
    n, vol = rec.n, rec.vol_x
    tau_sum = rec.r1 * rec.tau1 + rec.r2 * rec.tau2
    rhs = 2 * PI / (factorial(n - 1) * vol) * (rec.d1 + rec.d2)
    out = [Verdict("tau_constraint", tau_sum == rhs,
                   f"r1*tau1 + r2*tau2 = {tau_sum}; required {rhs}")]

    gap = rec.tau1 - rec.tau2
    if gap.coeff == 0:
        sigma_ok, detail = False, "tau1 == tau2; sigma undefined"
    else:
        from_taus = 4 * PI / gap
        literal = 1 / sigma_from_taus_literal(rec)
        sigma_ok = from_taus == rec.sigma
        detail = f"4π/(tau1 - tau2) = {from_taus}; literal middle form gives {literal}; sigma = {rec.sigma}"
        if literal != from_taus:
            detail += " (middle form disagrees)"
    out.append(Verdict("sigma_relation", sigma_ok, detail))

    pref = 2 * PI / (factorial(n) * rec.vol_sigma)
    chain = [pref * (rec.deg_sigma_E - rec.r2 * rec.deg_sigma_K_star),
             pref * deg_sigma_pullback(n, rec.sigma, rec.d1 + rec.d2),
             2 * PI / (factorial(n - 1) * vol) * (rec.d1 + rec.d2)]
    out.append(Verdict("degree_chain", chain[0] == chain[1] == chain[2],
                       " = ".join(str(x) for x in chain)))

    out.append(Verdict("tau_gap_equals_c", gap == rec.c and rec.c == 4 * PI / rec.sigma,
                       f"tau1 - tau2 = {gap}; c = {rec.c}; 4π/sigma = {4 * PI / rec.sigma}"))
    return out
