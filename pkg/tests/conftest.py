import math

import numpy as np
import pytest

from vortexlab.kahler_base import build_base
from vortexlab.line_bundles import HolomorphicSection
from vortexlab.vortex_solver import HolomorphicTriple, solve


def sphere_xyz(geom):
    """Unit-sphere embedding of every node; the z-chart origin maps to x3 = -1."""
    z = geom.evaluate(lambda q: q)
    inf = np.isinf(z)
    zz = np.where(inf, 0, z)
    r2 = np.abs(zz) ** 2
    x1 = np.where(inf, 0.0, 2 * zz.real / (1 + r2))
    x2 = np.where(inf, 0.0, 2 * zz.imag / (1 + r2))
    x3 = np.where(inf, 1.0, (r2 - 1) / (r2 + 1))
    return x1, x2, x3


def bump(geom, amp=0.4, centre=(0.3, 0.0, 0.5), width=0.3):
    x1, x2, x3 = sphere_xyz(geom)
    c1, c2, c3 = centre
    return amp * np.exp(-((x1 - c1) ** 2 + (x2 - c2) ** 2 + (x3 - c3) ** 2) / width)


@pytest.fixture(scope="session")
def geom64():
    return build_base(64)


@pytest.fixture(scope="session")
def geom32():
    return build_base(32)


@pytest.fixture(scope="session")
def solved_triple(geom64):
    phi = HolomorphicSection(0, 1, (0, 1))
    t = HolomorphicTriple(1, 0, phi, 3 * math.pi, geom64)
    return t, solve(t)


ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line per acceptance criterion; returns the verdict."""
    log = request.config.stash.setdefault(ACCEPTANCE, [])

    def record(number, title, ok, detail):
        line = f"criterion {number} [{title}]: {'PASS' if ok else 'FAIL'} ({detail})"
        log.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = config.stash.get(ACCEPTANCE, None)
    if log:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(log):
            terminalreporter.write_line(line)
