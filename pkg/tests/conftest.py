import sys
import cmath
import math

import pytest

from torusgg.appell_humbert import LineBundleData, product_type_form
from torusgg.lattice import Isogeny, Torus

TAUS = [1j, 0.3 + 1.2j, cmath.exp(1j * math.pi / 3)]


@pytest.fixture(params=TAUS, ids=["tau_i", "tau_0.3+1.2i", "tau_exp_pi_i_3"])
def elliptic(request) -> Torus:
    return Torus.elliptic(request.param)


@pytest.fixture
def surface() -> Torus:
    return Torus.product(Torus.elliptic(1j), Torus.elliptic(0.3 + 1.2j))


def line(T: Torus, divisors, chi=None) -> LineBundleData:
    return LineBundleData.from_alt_form(T, product_type_form(divisors), chi)


def elliptic_isogeny(k: int = 2) -> Isogeny:
    """``C/(Z + k i Z) -> C/(Z + i Z)``."""
    return Isogeny.from_sublattice(Torus.elliptic(1j), [[1, 0], [0, k]])


def surface_isogeny(k: int) -> Isogeny:
    T = Torus.product(Torus.elliptic(1j), Torus.elliptic(0.3 + 1.2j))
    return Isogeny.from_sublattice(T, [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, k]])


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if module is not None and module.LINES:
        terminalreporter.section("acceptance criteria")
        for line in module.LINES:
            terminalreporter.write_line(line)
