import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import TAUS, elliptic_isogeny, line, surface_isogeny
from torusgg.appell_humbert import LineBundleData, tensor_power
from torusgg.errors import NotAmple, TruncationInsufficient
from torusgg.lattice import Torus
from torusgg.theta import (
    TruncationParams,
    check_automorphy,
    curvature_fd,
    eval_sections,
    gaussian_tail_bound,
    hermitian_pairing,
    pairing_periodicity_check,
    section_basis,
)

unit = st.floats(0, 1, allow_nan=False)
phases = st.lists(unit, min_size=4, max_size=4)


def random_chi(ts):
    return [cmath.exp(2j * math.pi * t) for t in ts]


@pytest.mark.parametrize("tau", TAUS)
def test_principal_section_matches_jacobi_theta(tau):
    # |f| exp(-pi/2 H(v,v)) and |theta_3(z)| exp(-pi y^2 / Im tau) are norms of the
    # unique section for the same metric, so their ratio is constant
    T = Torus.elliptic(tau)
    B = section_basis(line(T, [1]))
    q = mpmath.exp(1j * mpmath.pi * tau)
    ratios = []
    for x in np.random.default_rng(7).random((8, 2)):
        z = T.point(x)[0]
        f = abs(B.evaluate(np.array([[z]]), normalized=True)[0, 0])
        th = abs(complex(mpmath.jtheta(3, mpmath.pi * z, q))) * math.exp(-math.pi * z.imag**2 / tau.imag)
        ratios.append(f / th)
    assert np.ptp(ratios) / np.mean(ratios) < 1e-12


def test_principal_zero_at_half_period(elliptic):
    B = section_basis(line(elliptic, [1]))
    vals = B.evaluate(elliptic.point([0.5, 0.5]).reshape(1, -1), normalized=True)
    assert abs(vals[0, 0]) < 1e-14


def test_type_two_values_frozen():
    # brute-force mpmath sum at 40 digits over |l| <= 15
    p = elliptic_isogeny(2)
    B = section_basis(line(p.source, [2]))
    got = B.evaluate(p.source.point([0.5, 0.5]).reshape(1, -1), normalized=True)[0]
    assert got == pytest.approx([-0.91357913815611679897j, 1.0864348112133079827j], abs=1e-14)


@pytest.mark.parametrize("divisors", [[1, 1], [1, 2], [2, 2]])
def test_fast_evaluation_matches_mp(surface, divisors):
    L = line(surface, divisors, chi=random_chi([0.1, 0.7, 0.25, 0.9]))
    B = section_basis(L)
    for x in np.random.default_rng(3).random((2, 4)):
        v = surface.point(x)
        fast = B.evaluate(v.reshape(1, -1))[0]
        slow = np.array([complex(z) for z in B.evaluate_mp(v, dps=25, box=7)])
        assert np.abs(fast - slow).max() <= 1e-12 * max(1.0, np.abs(slow).max())


@given(phases, st.lists(unit, min_size=4, max_size=4), st.lists(st.integers(-3, 3), min_size=4, max_size=4))
@settings(max_examples=40, deadline=None)
def test_automorphy_random_semicharacter(ts, x, n):
    T = Torus.product(Torus.elliptic(1j), Torus.elliptic(0.3 + 1.2j))
    L = line(T, [1, 2], chi=random_chi(ts))
    B = section_basis(L)
    assert check_automorphy(B, T.point(np.array(x)), n) < 1e-10


@pytest.mark.parametrize("m", [1, 2, 3])
def test_automorphy_elliptic_powers(elliptic, m):
    B = section_basis(tensor_power(line(elliptic, [1]), m))
    rng = np.random.default_rng(m)
    for _ in range(10):
        v = elliptic.point(rng.random(2))
        assert check_automorphy(B, v, rng.integers(-3, 4, size=2)) < 1e-10


def test_automorphy_detects_wrong_semicharacter(elliptic):
    L = line(elliptic, [1])
    B = section_basis(L)
    wrong = line(elliptic, [1], chi=[1j, 1.0])
    v = elliptic.point([0.2, 0.3])
    assert check_automorphy(B, v, [1, 0], bundle=wrong) > 1e-2


def test_non_ample_has_no_basis(elliptic):
    with pytest.raises(NotAmple):
        section_basis(line(elliptic, [-1]))


def test_sections_are_independent(surface):
    B = section_basis(line(surface, [2, 2]))
    pts = surface.point(np.random.default_rng(0).random((12, 4)))
    vals = B.evaluate(pts, normalized=True)
    assert np.linalg.matrix_rank(vals, tol=1e-8) == 4


def test_pairing_periodicity(surface):
    B = section_basis(line(surface, [1, 2], chi=random_chi([0.3, 0.1, 0.8, 0.5])))
    rng = np.random.default_rng(5)
    for _ in range(10):
        v = surface.point(rng.random(4))
        n = rng.integers(-2, 3, size=4)
        assert pairing_periodicity_check(B, 0, 1, v, n) < 1e-12
        assert hermitian_pairing(B, 0, 0, v).real >= 0


def test_curvature_constant(surface):
    L = line(surface, [1, 3])
    target = np.pi * L.H.matrix
    for x in np.random.default_rng(2).random((3, 4)):
        fd = curvature_fd(L.H, 1, surface.point(x))
        assert np.abs(fd - target).max() < 1e-5 * np.abs(target).max()


@pytest.mark.parametrize("g", [1, 2, 3])
def test_tail_bound_decreases(g):
    values = [gaussian_tail_bound(R, 0.8, g) for R in range(3, 10)]
    assert all(b < a for a, b in zip(values, values[1:]))
    assert gaussian_tail_bound(0.1, 0.8, g) == math.inf


@pytest.mark.parametrize("x0", [0.0, 0.3, 0.5, 0.77])
@pytest.mark.parametrize("R", [2, 3, 4])
def test_tail_bound_dominates_tail_g1(x0, R):
    c = 0.6
    # the enumeration ball is centred at the nearest integer to x0
    center = round(x0)
    tail = sum(math.exp(-math.pi * c * (n - x0) ** 2) for n in range(-60, 61) if abs(n - center) > R)
    assert tail <= gaussian_tail_bound(R, c, 1)


def test_tail_bound_dominates_tail_g2():
    c = 0.5
    x0 = np.array([0.4, -0.3])
    R = 3
    tail = 0.0
    for a in range(-30, 31):
        for b in range(-30, 31):
            n = np.array([a, b])
            if (n**2).sum() > R * R:
                tail += math.exp(-math.pi * c * ((n - x0) ** 2).sum())
    assert tail <= gaussian_tail_bound(R, c, 2)


def test_truncation_params():
    tp = TruncationParams(tail_bound=1e-12)
    R = tp.certify(1.0, 2)
    assert gaussian_tail_bound(R, 1.0, 2) <= 1e-12
    assert gaussian_tail_bound(R - 1, 1.0, 2) > 1e-12
    with pytest.raises(TruncationInsufficient):
        TruncationParams(radius=2).certify(1.0, 2)
    assert TruncationParams(tail_bound=1e-3, radius=20).certify(1.0, 2) == 20
    with pytest.raises(ValueError):
        TruncationParams(tail_bound=0)


def test_radius_follows_tail_bound():
    p = elliptic_isogeny(2)
    B = section_basis(line(p.source, [2]))
    v = p.source.point(np.array([[0.31, 0.77]]))
    assert B.certified_radius(TruncationParams(1e-2)) < B.certified_radius(TruncationParams(1e-14))
    assert np.abs(B.evaluate(v, TruncationParams(1e-14)) - B.evaluate(v)).max() < 1e-12


def test_eval_sections_single_point():
    q = surface_isogeny(2)
    B = section_basis(line(q.source, [1, 2]))
    v = q.source.point([0.1, 0.2, 0.3, 0.4])
    assert np.allclose(eval_sections(B, v), B.evaluate(v.reshape(1, -1))[0])


def test_evaluation_deterministic(surface):
    B = section_basis(line(surface, [2, 2]))
    pts = surface.point(np.random.default_rng(11).random((3000, 4)))
    a = B.evaluate(pts, normalized=True)
    b = B.evaluate(pts, normalized=True)
    assert np.array_equal(a, b)
    # chunked evaluation agrees with point-by-point evaluation
    assert np.allclose(a[2500], B.evaluate(pts[2500:2501], normalized=True)[0], rtol=0, atol=1e-13)


def test_line_bundle_data_round_trip(elliptic):
    L = line(elliptic, [3])
    M = LineBundleData.from_hermitian(elliptic, L.H.matrix, L.chi.values)
    assert M.same_data(L)
