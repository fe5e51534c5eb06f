"""Line bundles on complex tori from Appell-Humbert data ``(H, chi)``.

Conventions
-----------
``H(x, y) = y^H @ Hm @ x`` is C-linear in the first argument, so that the
factor of automorphy

    J(v, lam) = chi(lam) * exp(pi * H(v, lam) + pi/2 * H(lam, lam))

is holomorphic in ``v``. ``E = Im H`` restricted to the lattice is the
integral alternating form; a semicharacter satisfies
``chi(l + m) = chi(l) chi(m) exp(pi i E(l, m))``.

The default semicharacter is ``chi0(l) = exp(pi i E(l1, l2))`` for the
symplectic splitting ``Lambda = Lambda1 (+) Lambda2`` produced by
:func:`torusgg.lattice.frobenius_normal_form`.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .errors import (
    DegenerateForm,
    IndefiniteBorderline,
    InvalidHermitianForm,
    NotAmple,
    TorusMismatch,
)
from .lattice import (
    IntAltForm,
    Isogeny,
    Torus,
    _matmul,
    _transpose,
    frobenius_normal_form,
)

INTEGRALITY_TOL = 1e-8
UNIT_TOL = 1e-10
POSITIVITY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class HermitianForm:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.atleast_2d(np.asarray(self.matrix, dtype=complex))
        if m.shape[0] != m.shape[1]:
            raise InvalidHermitianForm("Hermitian matrix must be square")
        scale = max(1.0, float(np.abs(m).max()))
        if np.abs(m - m.conj().T).max() > 1e-12 * scale:
            raise InvalidHermitianForm("matrix is not Hermitian")
        m = (m + m.conj().T) / 2
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def g(self) -> int:
        return self.matrix.shape[0]

    def __call__(self, x, y):
        """``H(x, y)``; broadcasts over leading axes of ``x`` and ``y``."""
        x = np.asarray(x, dtype=complex)
        y = np.asarray(y, dtype=complex)
        return np.einsum("...k,kj,...j->...", y.conj(), self.matrix, x)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def alt_form(self, T: Torus) -> IntAltForm:
        """``Im H`` on the lattice basis, snapped to integers."""
        P = T.period_matrix
        gram = (P.conj().T @ self.matrix @ P).T
        E = gram.imag
        rounded = np.rint(E)
        scale = max(1.0, float(np.abs(E).max()))
        if np.abs(E - rounded).max() > INTEGRALITY_TOL * scale:
            raise InvalidHermitianForm("Im H is not integral on the lattice")
        return IntAltForm(rounded.astype(int))

    def __add__(self, other: "HermitianForm") -> "HermitianForm":
        return HermitianForm(self.matrix + other.matrix)

    def scaled(self, k: float) -> "HermitianForm":
        return HermitianForm(k * self.matrix)

    def pulled_back(self, alpha) -> "HermitianForm":
        alpha = np.asarray(alpha, dtype=complex)
        return HermitianForm(alpha.conj().T @ self.matrix @ alpha)


def hermitian_from_alt_form(T: Torus, E: IntAltForm) -> HermitianForm:
    """The Hermitian form ``H(u, w) = E(iu, w) + i E(u, w)`` with ``Im H = E``.

    Raises if ``E`` is not compatible with the complex structure.
    """
    if not isinstance(E, IntAltForm):
        E = IntAltForm(E)
    g = T.g
    P = T.period_matrix
    R = np.vstack([P.real, P.imag])
    Rinv = np.linalg.inv(R)
    ER = Rinv.T @ E.as_array() @ Rinv
    J = np.block([[np.zeros((g, g)), -np.eye(g)], [np.eye(g), np.zeros((g, g))]])
    scale = max(1.0, float(np.abs(ER).max()))
    if np.abs(J.T @ ER @ J - ER).max() > 1e-9 * scale:
        raise InvalidHermitianForm("alternating form is not of type (1,1) for this complex structure")
    U = np.vstack([np.eye(g), np.zeros((g, g))])
    real_part = (J @ U).T @ ER @ U
    imag_part = U.T @ ER @ U
    # Hm[l, k] = H(e_k, e_l)
    return HermitianForm((real_part + 1j * imag_part).T)


def product_type_form(divisors) -> IntAltForm:
    """Alternating form of type ``divisors`` on a product of elliptic curves.

    The lattice basis is ordered as in :meth:`Torus.product`:
    ``(1, ..., 1, tau_1, ..., tau_g)``.
    """
    g = len(divisors)
    m = [[0] * (2 * g) for _ in range(2 * g)]
    for i, d in enumerate(divisors):
        m[i][g + i] = -d
        m[g + i][i] = d
    return IntAltForm(m)


def _unimodular_inverse(B) -> list[list[int]]:
    n = len(B)
    aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(B)]
    for c in range(n):
        piv = next(r for r in range(c, n) if aug[r][c] != 0)
        aug[c], aug[piv] = aug[piv], aug[c]
        pv = aug[c][c]
        aug[c] = [x / pv for x in aug[c]]
        for r in range(n):
            if r != c and aug[r][c] != 0:
                f = aug[r][c]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[c])]
    inv = [[aug[i][n + j] for j in range(n)] for i in range(n)]
    out = [[int(x) for x in row] for row in inv]
    if any(x != y for r1, r2 in zip(out, inv) for x, y in zip(r1, r2)):
        raise ValueError("matrix is not unimodular")
    return out


@dataclass(frozen=True, eq=False)
class Semicharacter:
    values: tuple[complex, ...]
    alt_form: IntAltForm

    def __post_init__(self):
        vals = tuple(complex(v) for v in self.values)
        if len(vals) != self.alt_form.size:
            raise ValueError("semicharacter needs one value per lattice generator")
        if any(abs(abs(v) - 1.0) > UNIT_TOL for v in vals):
            raise ValueError("semicharacter values must have unit modulus")
        object.__setattr__(self, "values", vals)

    def __call__(self, n) -> complex:
        """Value on the lattice vector with integer coordinates ``n``."""
        n = [int(k) for k in n]
        E = self.alt_form.matrix
        out = complex(1.0)
        for k, nk in enumerate(n):
            if nk:
                out *= self.values[k] ** nk
        twist = sum(n[k] * n[l] * E[k][l] for k in range(len(n)) for l in range(k + 1, len(n)))
        return out * (-1 if twist % 2 else 1)

    @classmethod
    def canonical(cls, E: IntAltForm, basis=None) -> "Semicharacter":
        """``chi0(l) = exp(pi i E(l1, l2))`` for the splitting given by ``basis``."""
        if basis is None:
            _, basis = frobenius_normal_form(E)
        g = E.size // 2
        Binv = _unimodular_inverse(basis)
        G = E.transformed(basis).matrix
        vals = []
        for k in range(E.size):
            c = [Binv[i][k] for i in range(E.size)]
            s = sum(c[i] * G[i][g + j] * c[g + j] for i in range(g) for j in range(g))
            vals.append(-1.0 if s % 2 else 1.0)
        return cls(tuple(vals), E)

    def __mul__(self, other: "Semicharacter") -> "Semicharacter":
        return Semicharacter(
            tuple(a * b for a, b in zip(self.values, other.values)), self.alt_form + other.alt_form
        )

    def close_to(self, other: "Semicharacter", tol: float = 1e-10) -> bool:
        return self.alt_form.matrix == other.alt_form.matrix and all(
            abs(a - b) <= tol for a, b in zip(self.values, other.values)
        )


@dataclass(frozen=True, eq=False)
class LineBundleData:
    torus: Torus
    H: HermitianForm
    chi: Semicharacter
    _alt: IntAltForm = field(init=False, repr=False)

    def __post_init__(self):
        if self.H.g != self.torus.g:
            raise InvalidHermitianForm("Hermitian form dimension does not match the torus")
        E = self.H.alt_form(self.torus)
        if E.matrix != self.chi.alt_form.matrix:
            raise InvalidHermitianForm("semicharacter alternating form differs from Im H")
        object.__setattr__(self, "_alt", E)

    @classmethod
    def from_hermitian(cls, T: Torus, H, chi_values=None) -> "LineBundleData":
        if not isinstance(H, HermitianForm):
            H = HermitianForm(H)
        E = H.alt_form(T)
        if chi_values is None:
            chi = _default_chi(E)
        else:
            chi = Semicharacter(tuple(chi_values), E)
        return cls(T, H, chi)

    @classmethod
    def from_alt_form(cls, T: Torus, E, chi_values=None) -> "LineBundleData":
        if not isinstance(E, IntAltForm):
            E = IntAltForm(E)
        return cls.from_hermitian(T, hermitian_from_alt_form(T, E), chi_values)

    @property
    def alt_form(self) -> IntAltForm:
        return self._alt

    @property
    def g(self) -> int:
        return self.torus.g

    @cached_property
    def symplectic(self) -> tuple[list[int], list[list[int]]]:
        """Cached ``(divisors, basis)`` of the Frobenius normal form of ``Im H``."""
        return frobenius_normal_form(self._alt)

    @property
    def divisors(self) -> list[int]:
        return self.symplectic[0]

    def factor(self, v, n) -> complex:
        """Factor of automorphy ``J(v, lam)`` for the lattice vector with coordinates ``n``."""
        lam = self.torus.lattice_vector(n)
        return self.chi(n) * np.exp(np.pi * self.H(v, lam) + np.pi / 2 * self.H(lam, lam))

    def same_data(self, other: "LineBundleData", tol: float = 1e-10) -> bool:
        return (
            self.torus.same_as(other.torus)
            and np.abs(self.H.matrix - other.H.matrix).max() <= tol
            and self.chi.close_to(other.chi, tol)
        )

    def to_dict(self) -> dict:
        return {
            "hermitian": [[[z.real, z.imag] for z in row] for row in self.H.matrix],
            "chi": [[z.real, z.imag] for z in self.chi.values],
            "alt_form": self._alt.as_list(),
        }


def _default_chi(E: IntAltForm) -> Semicharacter:
    try:
        return Semicharacter.canonical(E)
    except DegenerateForm:
        return Semicharacter(tuple([1.0] * E.size), E)


def is_ample(L: LineBundleData) -> bool:
    return is_positive_definite(L.H)


def is_positive_definite(H: HermitianForm) -> bool:
    """True if every eigenvalue clears the relative tolerance band, False if one is negative."""
    eig = H.eigenvalues()
    top = float(np.abs(eig).max())
    if top == 0.0:
        return False
    tol = POSITIVITY_TOL * top
    if np.any(eig < -tol):
        return False
    if np.any(np.abs(eig) <= tol):
        raise IndefiniteBorderline(f"eigenvalue within {tol:.3g} of zero: {eig.tolist()}")
    return True


def h0(L: LineBundleData) -> int:
    """Dimension of the space of sections of an ample bundle: the Pfaffian ``prod d_i``."""
    if not is_ample(L):
        raise NotAmple("h0 is only computed for ample bundles")
    out = 1
    for d in L.divisors:
        out *= d
    return out


def _check_same_torus(a: Torus, b: Torus):
    if not a.same_as(b):
        raise TorusMismatch("bundles live on different tori")


def tensor(L1: LineBundleData, L2: LineBundleData) -> LineBundleData:
    _check_same_torus(L1.torus, L2.torus)
    return LineBundleData(L1.torus, L1.H + L2.H, L1.chi * L2.chi)


def tensor_power(L: LineBundleData, m: int) -> LineBundleData:
    if m < 1:
        raise ValueError("tensor power must be positive")
    out = L
    for _ in range(m - 1):
        out = tensor(out, L)
    return out


def translate(L: LineBundleData, a) -> LineBundleData:
    """``t_a^* L``: same ``H``, semicharacter twisted by ``exp(2 pi i Im H(a, .))``."""
    a = np.asarray(a, dtype=complex).reshape(L.g)
    P = L.torus.period_matrix
    twist = [cmath.exp(2j * np.pi * float(np.imag(L.H(a, P[:, k])))) for k in range(P.shape[1])]
    chi = Semicharacter(tuple(c * t for c, t in zip(L.chi.values, twist)), L.chi.alt_form)
    return LineBundleData(L.torus, L.H, chi)


def pullback(p: Isogeny, L: LineBundleData) -> LineBundleData:
    _check_same_torus(p.target, L.torus)
    H = L.H.pulled_back(p.linear_map)
    M = [list(r) for r in p.lattice_matrix]
    E = IntAltForm(_matmul(_matmul(_transpose(M), L.alt_form.as_list()), M))
    cols = _transpose(M)
    chi = Semicharacter(tuple(L.chi(c) for c in cols), E)
    return LineBundleData(p.source, H, chi)
