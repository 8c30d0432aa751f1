"""Command-line entry point.

Usage::

    vortexlab COMMAND CONFIG [-o OUT_DIR]

Commands: ``params``, ``solve``, ``reduce``, ``fiber-check``, ``projdeg``.

Config grammar: one ``key = value`` per line; ``#`` starts a comment; blank
lines are ignored; keys may not repeat.  Exact values accept integers and
fractions (``3/2``).  Tau values also accept pi multiples (``3·π``, ``3*pi``,
``3pi``, ``-1/2·π``).  ``phi`` is a space-separated list of ``re,im`` pairs,
lowest power of z first, or ``0`` for the zero section.

Exit status: 0 when every verdict passes, 1 when a verdict fails, 2 on a
configuration or input error, 3 on numerical failure (the report is still
written).
"""
from __future__ import annotations

import argparse
import math
import os
import re
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import fiber_geometry as fg
from . import parameters as params_mod
from . import projectivization as proj
from . import reduction as red
from .kahler_base import CHART_RADIUS, ConfigurationError, build_base
from .line_bundles import HolomorphicSection, LineBundleMetric
from .vortex_solver import DEFAULT_MAX_ITER, DEFAULT_RESOLUTION, DEFAULT_TOL, HolomorphicTriple, solve

EXIT_OK, EXIT_VERDICT, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
FIELD_MAGIC = "# vortexlab field v1"
FIELD_COLUMNS = "chart,i,j,z_re,z_im,value_re,value_im"


class ConfigError(ValueError):
    pass


class FieldFormatError(ValueError):
    pass


# ---------------------------------------------------------------- values

def _exact(text):
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"expected an exact rational, got {text!r}") from None


def _integer(text):
    v = _exact(text)
    if v.denominator != 1:
        raise ValueError(f"expected an integer, got {text!r}")
    return int(v)


def _positive_int(text):
    v = _integer(text)
    if v < 1:
        raise ValueError(f"expected a positive integer, got {text!r}")
    return v


def _real(text):
    try:
        v = float(text)
    except ValueError:
        raise ValueError(f"expected a real number, got {text!r}") from None
    if not math.isfinite(v):
        raise ValueError(f"expected a finite number, got {text!r}")
    return v


def _pi_value(text):
    """Exact pi multiple or plain real."""
    t = text.strip().replace(" ", "")
    m = re.fullmatch(r"([+-]?)(\d+(?:/\d+)?)?[·*]?(?:π|pi)", t)
    if m:
        return params_mod.PiMultiple(Fraction(m.group(1) + (m.group(2) or "1")), 1)
    try:
        return params_mod.PiMultiple(Fraction(t), 0)
    except (ValueError, ZeroDivisionError):
        return _real(t)


def _phi(text):
    t = text.strip()
    if t in ("", "0"):
        return ()
    coeffs = []
    for pair in t.split():
        parts = pair.split(",")
        if len(parts) != 2:
            raise ValueError(f"phi coefficient {pair!r} is not a re,im pair")
        coeffs.append(complex(_real(parts[0]), _real(parts[1])))
    return tuple(coeffs)


def _choice(*options):
    def parse(text):
        t = text.strip()
        if t not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {t!r}")
        return t
    return parse


def _path(text):
    return Path(text.strip())


COMMON_SOLVE = {
    "resolution": (_positive_int, DEFAULT_RESOLUTION),
    "vol": (_exact, Fraction(1)),
    "d1": (_integer, None),
    "d2": (_integer, None),
    "phi": (_phi, ()),
    "tau1": (_pi_value, None),
    "sigma": (_exact, None),
    "tol": (_real, DEFAULT_TOL),
    "max_iter": (_integer, DEFAULT_MAX_ITER),
}

SCHEMAS = {
    "params": {
        "n": (_positive_int, 1), "vol": (_exact, Fraction(1)), "sigma": (_exact, None),
        "d1": (_exact, None), "d2": (_exact, None),
        "r1": (_positive_int, 1), "r2": (_positive_int, 1),
    },
    "solve": dict(COMMON_SOLVE),
    "reduce": dict(COMMON_SOLVE, fiber_resolution=(_positive_int, None),
                   fiber_curvature=(_choice("analytic", "fd"), "analytic"),
                   u1_file=(_path, None), u2_file=(_path, None)),
    "fiber-check": {"sigma": (_exact, None), "grid": (_positive_int, 64),
                    "points": (_positive_int, 100), "seed": (_integer, 0)},
    "projdeg": {"a": (_integer, None), "sigma": (_exact, None), "grid": (_positive_int, 64),
                "n": (_positive_int, 1), "vol": (_exact, Fraction(1))},
}
REQUIRED = {
    "params": ("sigma", "d1", "d2"),
    "solve": ("d1", "d2"),
    "reduce": ("d1", "d2", "sigma"),
    "fiber-check": ("sigma",),
    "projdeg": ("a", "sigma"),
}


def parse_config(text, command, source="<config>"):
    """Parse and validate a config for ``command``; errors carry the line number."""
    schema = SCHEMAS[command]
    values, seen = {}, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, _, value = (s.strip() for s in line.partition("="))
        if key not in schema:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r} for command {command!r}; "
                              f"allowed: {', '.join(sorted(schema))}")
        if key in seen:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r} (first on line {seen[key]})")
        seen[key] = lineno
        try:
            values[key] = schema[key][0](value)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: {key}: {exc}") from None
    for key in REQUIRED[command]:
        if key not in values:
            raise ConfigError(f"{source}: missing required key {key!r}")
    for key, (_, default) in schema.items():
        values.setdefault(key, default)
    return values


# ---------------------------------------------------------------- reports

def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, complex):
        return f"{format(value.real, '.17g')},{format(value.imag, '.17g')}"
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (tuple, list)):
        return " ".join(_fmt(v) for v in value)
    return str(value)


class Report:
    """Sectioned ``key = value`` text; ``[verdicts]`` holds ``pass``/``fail`` lines."""

    def __init__(self, command):
        self.command = command
        self.sections = []
        self.verdicts = []

    def section(self, name, items):
        self.sections.append((name, list(items)))

    def verdict(self, name, passed, detail=""):
        self.verdicts.append((name, bool(passed), detail))

    @property
    def passed(self):
        return all(v for _, v, _ in self.verdicts)

    def render(self):
        lines = [f"# vortexlab {self.command} report"]
        for name, items in self.sections:
            lines.append(f"[{name}]")
            lines.extend(f"{k} = {_fmt(v)}" for k, v in items)
        lines.append("[verdicts]")
        for name, ok, detail in self.verdicts:
            lines.append(f"{name} = {'pass' if ok else 'fail'}")
            if detail:
                lines.append(f"{name}.detail = {detail}")
        lines.append(f"all_pass = {_fmt(self.passed)}")
        return "\n".join(lines) + "\n"

    def write(self, path):
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.render(), encoding="utf-8")


def read_report(path):
    """Parse a report back into ``{section: {key: value_string}}``."""
    out, current = {}, None
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("#") or not line.strip():
            continue
        if line.startswith("[") and line.endswith("]"):
            current = out.setdefault(line[1:-1], {})
            continue
        key, _, value = line.partition(" = ")
        current[key] = value
    return out


# ---------------------------------------------------------------- fields

def dump_field(values, path, geom=None, radius=CHART_RADIUS):
    """Write a chart field as text columns ``chart,i,j,z_re,z_im,value_re,value_im``."""
    values = np.asarray(values)
    if values.ndim != 3 or values.shape[0] != 2 or values.shape[1] != values.shape[2]:
        raise ValueError(f"expected a (2, N, N) chart field, got shape {values.shape}")
    if not np.all(np.isfinite(values)):
        raise ValueError("field contains non-finite values")
    n = values.shape[1]
    if geom is not None:
        if geom.shape != values.shape:
            raise ValueError("field does not match the geometry")
        radius, coords = geom.radius, geom.coords
    else:
        x = np.linspace(-radius, radius, n)
        chart = x[:, None] + 1j * x[None, :]
        coords = np.stack([chart, chart])
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    vals = values.astype(complex)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(f"{FIELD_MAGIC}\n# resolution = {n}\n# radius = {_fmt(float(radius))}\n"
                 f"# columns = {FIELD_COLUMNS}\n")
        for c in range(2):
            for i in range(n):
                for j in range(n):
                    z, v = coords[c, i, j], vals[c, i, j]
                    fh.write(f"{c},{i},{j},{_fmt(z.real)},{_fmt(z.imag)},"
                             f"{_fmt(v.real)},{_fmt(v.imag)}\n")


def load_field(path, resolution=None, radius=None):
    """Inverse of :func:`dump_field`; real data comes back as a float array."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise FieldFormatError(f"{path}: empty field file")
    if lines[0] != FIELD_MAGIC:
        raise FieldFormatError(f"{path}:1: missing header {FIELD_MAGIC!r}")
    header = {}
    row = 1
    while row < len(lines) and lines[row].startswith("#"):
        key, _, value = lines[row][1:].partition("=")
        header[key.strip()] = value.strip()
        row += 1
    try:
        n = int(header["resolution"])
        r = float(header["radius"])
    except (KeyError, ValueError):
        raise FieldFormatError(f"{path}: header must record resolution and radius") from None
    if header.get("columns") != FIELD_COLUMNS:
        raise FieldFormatError(f"{path}: unexpected column layout {header.get('columns')!r}")
    if resolution is not None and n != resolution:
        raise FieldFormatError(f"{path}: resolution {n} does not match expected {resolution}")
    if radius is not None and r != radius:
        raise FieldFormatError(f"{path}: chart radius {r} does not match expected {radius}")
    x = np.linspace(-r, r, n)
    out = np.empty((2, n, n), dtype=complex)
    filled = np.zeros((2, n, n), dtype=bool)
    for lineno in range(row + 1, len(lines) + 1):
        text = lines[lineno - 1]
        parts = text.split(",")
        if len(parts) != 7:
            raise FieldFormatError(f"{path}:{lineno}: expected 7 columns, got {len(parts)}")
        try:
            c, i, j = (int(p) for p in parts[:3])
            zr, zi, vr, vi = (float(p) for p in parts[3:])
        except ValueError:
            raise FieldFormatError(f"{path}:{lineno}: malformed number in {text!r}") from None
        if not (c in (0, 1) and 0 <= i < n and 0 <= j < n):
            raise FieldFormatError(f"{path}:{lineno}: index ({c}, {i}, {j}) out of range")
        if filled[c, i, j]:
            raise FieldFormatError(f"{path}:{lineno}: duplicate node ({c}, {i}, {j})")
        if abs(zr - x[i]) > 1e-12 or abs(zi - x[j]) > 1e-12:
            raise FieldFormatError(f"{path}:{lineno}: coordinates do not match the grid")
        if not (math.isfinite(vr) and math.isfinite(vi)):
            raise FieldFormatError(f"{path}:{lineno}: non-finite value")
        out[c, i, j] = complex(vr, vi)
        filled[c, i, j] = True
    if not filled.all():
        raise FieldFormatError(f"{path}: {int((~filled).sum())} of {filled.size} nodes missing")
    return out.real.copy() if not np.any(out.imag) else out


# ---------------------------------------------------------------- commands

def _cmd_params(cfg, out):
    rec = params_mod.derive(cfg["n"], cfg["vol"], cfg["sigma"], cfg["d1"], cfg["d2"],
                            cfg["r1"], cfg["r2"])
    rep = Report("params")
    rep.section("parameters", rec.as_items())
    for v in params_mod.verify_consistency(rec):
        rep.verdict(v.name, v.passed, v.detail)
    rep.write(out / "params.report")
    return rep, EXIT_OK


def _triple_from(cfg):
    geom = build_base(cfg["resolution"], float(cfg["vol"]))
    d1, d2 = cfg["d1"], cfg["d2"]
    phi = HolomorphicSection(d2, d1, cfg["phi"]) if cfg["phi"] else HolomorphicSection(d2, d1)
    tau1 = cfg["tau1"]
    if tau1 is None:
        if cfg["sigma"] is None:
            raise ConfigError("give tau1, or sigma to take tau1 from the parameter web")
        tau1 = params_mod.derive(1, cfg["vol"], cfg["sigma"], d1, d2).tau1
    return HolomorphicTriple(d1, d2, phi, float(tau1), geom), tau1


def _solve_report(t, tau1, result):
    rep = Report("solve")
    rep.section("triple", [("d1", t.d1), ("d2", t.d2), ("phi", t.phi.coefficients),
                           ("tau1", tau1), ("tau1_value", t.tau1), ("tau2_value", t.tau2),
                           ("vol", t.geom.vol), ("resolution", t.geom.resolution)])
    rep.section("result", [
        ("converged", result.converged), ("status", result.status),
        ("message", result.message or "-"), ("iterations", result.iterations),
        ("tol", result.tol), ("final_residual_sup", result.final_residual_sup),
        ("phi_integral", result.phi_integral),
        ("required_phi_integral", result.required_phi_integral),
        ("integral_identity_gap", result.integral_identity_gap),
        ("residual_trace", result.trace),
        ("steps", [f"{kind}:{_fmt(float(v))}" for kind, v in result.steps] or ["-"]),
    ])
    rep.verdict("converged", result.converged, result.message)
    return rep


def _write_fields(out, t, u1, u2):
    dump_field(u1, out / "fields" / "u1.csv", t.geom)
    dump_field(u2, out / "fields" / "u2.csv", t.geom)


def _cmd_solve(cfg, out):
    t, tau1 = _triple_from(cfg)
    result = solve(t, tol=cfg["tol"], max_iter=cfg["max_iter"])
    rep = _solve_report(t, tau1, result)
    rep.write(out / "solve.report")
    if np.all(np.isfinite(result.potentials[0])) and np.all(np.isfinite(result.potentials[1])):
        _write_fields(out, t, *result.potentials)
    return rep, EXIT_NUMERIC if result.status == "numerical_failure" else EXIT_OK


def _cmd_reduce(cfg, out):
    if cfg["d1"] < cfg["d2"] and cfg["phi"]:
        raise ConfigError("a nonzero phi needs d1 >= d2")
    rec = params_mod.derive(1, cfg["vol"], cfg["sigma"], cfg["d1"], cfg["d2"])
    if cfg["tau1"] is not None and float(cfg["tau1"]) != float(rec.tau1):
        raise ConfigError(f"tau1 = {cfg['tau1']} disagrees with the value {rec.tau1} fixed by sigma")
    cfg = dict(cfg, tau1=rec.tau1)
    t, tau1 = _triple_from(cfg)
    geom = t.geom
    status = EXIT_OK
    files = (cfg["u1_file"], cfg["u2_file"])
    if any(files):
        if not all(files):
            raise ConfigError("u1_file and u2_file must be given together")
        u1, u2 = (load_field(p, geom.resolution, geom.radius) for p in files)
        if np.iscomplexobj(u1) or np.iscomplexobj(u2):
            raise ConfigError("potentials must be real")
        solver_tol = None
    else:
        result = solve(t, tol=cfg["tol"], max_iter=cfg["max_iter"])
        srep = _solve_report(t, tau1, result)
        srep.write(out / "solve.report")
        if result.status == "numerical_failure":
            rep = Report("reduce")
            rep.section("input", [("source", "solver")])
            rep.verdict("solver", False, result.message)
            rep.write(out / "reduce.report")
            return rep, EXIT_NUMERIC
        u1, u2 = result.potentials
        _write_fields(out, t, u1, u2)
        solver_tol = cfg["tol"] if result.converged else None
        if not result.converged:
            status = EXIT_VERDICT
    fres = cfg["fiber_resolution"] or geom.resolution
    fiber = fg.build_fiber(float(cfg["sigma"]), fres)
    am = red.assemble(geom, fiber, LineBundleMetric(t.d1, u1, geom),
                      LineBundleMetric(t.d2, u2, geom), t.phi, rec,
                      fiber_curvature=cfg["fiber_curvature"])
    r = red.he_residual(am, solver_tol=solver_tol)
    rep = Report("reduce")
    rep.section("input", [("source", "files" if any(files) else "solver"),
                          ("d1", t.d1), ("d2", t.d2), ("sigma", rec.sigma),
                          ("lambda", rec.lam), ("tau1", rec.tau1), ("tau2", rec.tau2), ("c", rec.c),
                          ("base_resolution", geom.resolution), ("fiber_resolution", fres),
                          ("fiber_curvature", cfg["fiber_curvature"])])
    env = r.envelope
    rep.section("residuals", [
        ("block_residual_sup", r.block_residual_sup),
        ("fiber_constancy", r.fiber_constancy),
        ("vortex_deviation", r.vortex_deviation),
        ("off_diagonal_sup", r.off_diagonal_sup),
        ("mixed_component_sup", r.mixed_component_sup),
        ("fiber_constant_offset", r.fiber_constant_offset),
        ("envelope", env.value), ("envelope_grids", env.grids),
        ("envelope_errors", env.errors), ("envelope_order", env.order),
        ("threshold", red.ENVELOPE_FACTOR * env.value),
    ])
    lem = r.lemma
    rep.section("lemma", [
        ("contraction_d_prime_beta", lem.contraction_d_prime_beta),
        ("contraction_d_dprime_beta_adj", lem.contraction_d_dprime_beta_adj),
        ("pullback_contraction_gap", lem.pullback_contraction_gap),
        ("mixed_pairing_sup", lem.mixed_pairing_sup),
    ])
    if solver_tol is None and not any(files):
        rep.verdict("solver_converged", False, "vortex solve did not converge")
    for name, ok in r.verdicts.items():
        rep.verdict(name, ok)
    rep.write(out / "reduce.report")
    return rep, status


def _cmd_fiber_check(cfg, out):
    sigma = cfg["sigma"]
    if sigma <= 0:
        raise ConfigError(f"sigma must be positive, got {sigma}")
    s = float(sigma)
    rng = np.random.default_rng(cfg["seed"])
    pts = rng.normal(size=cfg["points"]) + 1j * rng.normal(size=cfg["points"])
    w = fg.eta_wedge_identity(s, pts)
    c = fg.fiber_he_constant(sigma)
    grid = cfg["grid"]
    cur = [fg.fiber_curvature_check(s, g) for g in (grid, 2 * grid)]
    clo = fg.eta_closedness_check(s, (grid // 2, grid))
    rep = Report("fiber-check")
    rep.section("normalization", [
        ("sigma", sigma), ("eta0_sq", w.eta0_sq), ("eta0_sq_times_2pi_over_sigma",
                                                    w.eta0_sq * 2 * math.pi / s),
        ("wedge_over_omega", w.ratio), ("ratio_spread", w.ratio_spread),
        ("contraction_error", w.contraction_error),
        ("literal_eta0_sq", w.literal_eta0_sq),
        ("literal_unnormalized_identity_error", w.literal_identity_error),
        ("literal_contraction", w.literal_contraction),
    ])
    rep.section("curvature", [
        ("c_exact", c), ("c_value", float(c)),
        ("grids", tuple(r.grid for r in cur)), ("sup_error", tuple(r.sup_error for r in cur)),
        ("rel_std", tuple(r.rel_std for r in cur)),
        ("error_ratio", cur[0].sup_error / cur[1].sup_error),
    ])
    rep.section("closedness", [("grids", clo.grids), ("errors", clo.errors), ("order", clo.order)])
    rep.verdict("wedge_contraction", w.contraction_error < 1e-12)
    rep.verdict("wedge_ratio_constant", w.ratio_spread < 1e-12)
    rep.verdict("closedness_order", abs(clo.order - 2.0) <= 0.2)
    rep.verdict("curvature_value", cur[0].sup_error < 1e-3, f"sup error {cur[0].sup_error:.3e}")
    rep.verdict("curvature_constancy", cur[0].rel_std < 1e-6, f"rel std {cur[0].rel_std:.3e}")
    ratio = cur[0].sup_error / cur[1].sup_error
    rep.verdict("curvature_refinement", 3.5 <= ratio <= 4.5, f"ratio {ratio:.3f}")
    rep.write(out / "fiber-check.report")
    return rep, EXIT_OK


def _cmd_projdeg(cfg, out):
    a, sigma = cfg["a"], cfg["sigma"]
    spec = proj.ProjectiveBundleSpec("split", n=cfg["n"], vol_x=cfg["vol"], degrees=(a, a))
    rec = proj.exact_degrees(spec, sigma)
    adm = proj.flatness_admissible(spec)
    rep = Report("projdeg")
    rep.section("exact", [("a", a), ("sigma", sigma), ("n", rec.n), ("vol_x", rec.vol_x),
                          ("deg_E", rec.deg_e), ("deg_taut", rec.taut),
                          ("deg_taut_pullback_form", rec.taut_pullback_form),
                          ("deg_K_star", rec.k_star)]
                + [(f"deg_O({k})", v) for k, v in sorted(rec.powers.items())])
    rep.verdict("admissible", adm.admissible, adm.reason)
    rep.verdict("decomposition_identity", rec.decomposition_ok)
    rep.verdict("linear_in_k", rec.linear_in_k and rec.taut == rec.taut_pullback_form)
    if rec.n == 1 and rec.vol_x == 1:
        grid = cfg["grid"]
        nums = [proj.taut_degree_report(a, float(sigma), g) for g in (grid, 2 * grid)]
        e = [r.error for r in nums]
        if max(e) < 1e-12:
            order = float("nan")
            order_ok = True
        else:
            h = [2 * CHART_RADIUS / (g - 1) for g in (grid, 2 * grid)]
            order = math.log(e[0] / e[1]) / math.log(h[0] / h[1])
            order_ok = abs(order - 2.0) <= 0.2
        rep.section("numeric", [("grids", (grid, 2 * grid)),
                                ("numeric", tuple(r.numeric for r in nums)),
                                ("error", tuple(e)), ("order", order),
                                ("base_term", nums[0].base_term),
                                ("fiber_term", nums[0].fiber_term),
                                ("fitted_fiber_constant", nums[0].fitted_fiber_constant)])
        rep.verdict("numeric_matches_exact", e[0] < 1e-3, f"error {e[0]:.3e}")
        rep.verdict("numeric_order", order_ok, f"order {order:.3f}")
    rep.write(out / "projdeg.report")
    return rep, EXIT_OK


COMMANDS = {
    "params": _cmd_params,
    "solve": _cmd_solve,
    "reduce": _cmd_reduce,
    "fiber-check": _cmd_fiber_check,
    "projdeg": _cmd_projdeg,
}


def run(command, config_path, out_dir):
    """Run one command; returns the exit status."""
    config_path = Path(config_path)
    try:
        text = config_path.read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read config {config_path}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(out_dir)
    try:
        cfg = parse_config(text, command, str(config_path))
        rep, status = COMMANDS[command](cfg, out)
    except (ConfigError, ConfigurationError, FieldFormatError, params_mod.DomainError,
            proj.SpecError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FloatingPointError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for name, ok, _ in rep.verdicts:
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    if status != EXIT_OK:
        return status
    return EXIT_OK if rep.passed else EXIT_VERDICT


def _thread_limit():
    raw = os.environ.get("VORTEXLAB_THREADS")
    if not raw:
        return None
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"VORTEXLAB_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"VORTEXLAB_THREADS must be a positive integer, got {raw!r}")
    return n


def main(argv=None):
    parser = argparse.ArgumentParser(prog="vortexlab", description=__doc__.split("\n\n")[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("config", help="path to a key = value config file")
    parser.add_argument("-o", "--out", default="out", help="output directory (default: out)")
    args = parser.parse_args(argv)
    try:
        limit = _thread_limit()
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if limit is None:
        return run(args.command, args.config, args.out)
    from threadpoolctl import threadpool_limits
    with threadpool_limits(limits=limit):
        return run(args.command, args.config, args.out)


if __name__ == "__main__":
    sys.exit(main())
