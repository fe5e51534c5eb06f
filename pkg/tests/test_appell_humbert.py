import cmath

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import line
from torusgg.appell_humbert import (
    HermitianForm,
    LineBundleData,
    Semicharacter,
    h0,
    hermitian_from_alt_form,
    is_ample,
    is_positive_definite,
    product_type_form,
    pullback,
    tensor,
    tensor_power,
    translate,
)
from torusgg.errors import IndefiniteBorderline, InvalidHermitianForm, NotAmple, TorusMismatch
from torusgg.lattice import IntAltForm, Isogeny, Torus

vec4 = st.lists(st.integers(-5, 5), min_size=4, max_size=4)
phase = st.floats(0, 1)


def test_hermitian_round_trip(surface):
    for divisors in ([1, 1], [1, 2], [2, 6]):
        E = product_type_form(divisors)
        H = hermitian_from_alt_form(surface, E)
        assert H.alt_form(surface).matrix == E.matrix
        assert np.all(H.eigenvalues() > 0)


def test_elliptic_hermitian_is_inverse_imaginary_part(elliptic):
    tau = elliptic.period_matrix[0, 1]
    H = hermitian_from_alt_form(elliptic, product_type_form([1]))
    assert H.matrix[0, 0] == pytest.approx(1 / tau.imag, rel=1e-12)


def test_incompatible_alt_form_rejected(surface):
    # pairs 1 with 1 across the factors: not a (1,1) form
    with pytest.raises(InvalidHermitianForm):
        hermitian_from_alt_form(surface, IntAltForm([[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]]))


def test_non_integral_hermitian_rejected(elliptic):
    with pytest.raises(InvalidHermitianForm):
        LineBundleData.from_hermitian(elliptic, [[0.37]])


@given(vec4, vec4, st.lists(phase, min_size=4, max_size=4))
def test_semicharacter_law(a, b, phases):
    E = product_type_form([1, 3])
    chi = Semicharacter(tuple(cmath.exp(2j * cmath.pi * t) for t in phases), E)
    s = [x + y for x, y in zip(a, b)]
    assert abs(chi(s) - chi(a) * chi(b) * cmath.exp(1j * cmath.pi * E(a, b))) < 1e-9


@given(vec4, vec4)
def test_canonical_semicharacter_law(a, b):
    E = product_type_form([2, 4])
    chi = Semicharacter.canonical(E)
    assert all(v in (1.0, -1.0) for v in chi.values)
    s = [x + y for x, y in zip(a, b)]
    assert abs(chi(s) - chi(a) * chi(b) * cmath.exp(1j * cmath.pi * E(a, b))) < 1e-12


def test_semicharacter_validation():
    E = product_type_form([1])
    with pytest.raises(ValueError):
        Semicharacter((1.0,), E)
    with pytest.raises(ValueError):
        Semicharacter((1.0, 2.0), E)


def test_h0_is_product_of_divisors(surface):
    assert h0(line(surface, [1, 1])) == 1
    assert h0(line(surface, [1, 2])) == 2
    assert h0(line(surface, [2, 6])) == 12


def test_tensor_powers(surface, elliptic):
    L = line(surface, [1, 1])
    for m in (1, 2, 3):
        Lm = tensor_power(L, m)
        assert Lm.divisors == [m, m]
        assert h0(Lm) == m**2
        assert np.allclose(Lm.H.matrix, m * L.H.matrix)
    with pytest.raises(TorusMismatch):
        tensor(L, line(elliptic, [1]))
    with pytest.raises(ValueError):
        tensor_power(L, 0)


def test_ampleness(elliptic):
    assert is_ample(line(elliptic, [1]))
    assert not is_ample(line(elliptic, [-1]))
    with pytest.raises(NotAmple):
        h0(line(elliptic, [-1]))


def test_borderline_eigenvalue():
    T = Torus.product(Torus.elliptic(1j), Torus.elliptic(1j))
    H = HermitianForm(np.diag([1.0, 1e-12]))
    with pytest.raises(IndefiniteBorderline):
        is_positive_definite(H)
    # degenerate but integral: only the first factor carries a form
    L = LineBundleData.from_hermitian(T, np.diag([1.0, 0.0]))
    with pytest.raises(IndefiniteBorderline):
        is_ample(L)


@given(st.lists(st.integers(-3, 3), min_size=2, max_size=2))
def test_translation_by_lattice_vector_is_trivial(n):
    T = Torus.elliptic(0.3 + 1.2j)
    L = line(T, [2])
    assert translate(L, T.lattice_vector(n)).same_data(L, tol=1e-9)


def test_translation_keeps_form(elliptic):
    L = line(elliptic, [1])
    La = translate(L, elliptic.point([0.25, 0.5]))
    assert np.allclose(La.H.matrix, L.H.matrix)
    assert not La.chi.close_to(L.chi)


@pytest.mark.parametrize("n", [2, 3])
def test_pullback_by_multiplication(surface, n):
    L = line(surface, [1, 1])
    P = pullback(Isogeny.multiplication(surface, n), L)
    assert P.divisors == [n * n, n * n]
    assert h0(P) == n ** (2 * surface.g) * h0(L)


def test_chi_length_checked(elliptic):
    with pytest.raises(ValueError):
        line(elliptic, [1], chi=[1.0])
