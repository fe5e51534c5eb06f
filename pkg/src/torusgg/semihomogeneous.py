"""Semihomogeneous vector bundles: explicit semirepresentations and isogeny pushforwards.

An explicit bundle ``E(G, H)`` of rank ``r`` has sections ``F: V -> C^r`` with

    F(v + lam) = G(lam)^T exp(pi/r H(v, lam) + pi/(2r) H(lam, lam)) F(v)

where ``G`` is a unitary semirepresentation,
``G(l + m) = G(l) G(m) exp(pi i/r E(l, m))``, ``E = Im H``. The transpose
appears because the values ``G(lam)`` are stored in the row-vector
convention in which that cocycle law holds; acting on column vectors the
law picks up the opposite sign.

A pushforward ``p_* L`` along ``p: A' -> A`` is realised as such a bundle
with ``H = r (alpha^{-1})^* H'`` and a monomial ``G`` whose permutation part
records how translation by a lattice vector permutes the kernel cosets.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from .appell_humbert import (
    HermitianForm,
    LineBundleData,
    h0,
    is_ample,
    is_positive_definite,
    tensor,
    translate,
)
from .errors import (
    HypothesisNotMet,
    IdentityViolation,
    InvalidHermitianForm,
    NonIntegralChernClass,
    NotAmple,
    RealizationMismatch,
    TorusMismatch,
)
from .lattice import IntAltForm, Isogeny, Torus, kernel_coords, pfaffian, reduce_mod_lattice
from .theta import ThetaBasis, TruncationParams, section_basis

COCYCLE_TOL = 1e-10
UNITARY_TOL = 1e-10


def _fraction_inverse(M) -> list[list[Fraction]]:
    n = len(M)
    aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(M)]
    for c in range(n):
        piv = next(r for r in range(c, n) if aug[r][c] != 0)
        aug[c], aug[piv] = aug[piv], aug[c]
        pv = aug[c][c]
        aug[c] = [x / pv for x in aug[c]]
        for r in range(n):
            if r != c and aug[r][c] != 0:
                f = aug[r][c]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[c])]
    return [row[n:] for row in aug]


def _floor_frac(x: Fraction) -> tuple[int, Fraction]:
    k = x.numerator // x.denominator
    return k, x - k


def orientation(T: Torus) -> int:
    """Sign relating Pfaffians of ``Im H`` on the lattice basis to top intersection numbers."""
    P = T.period_matrix
    E = (P.conj().T @ P).T.imag
    return 1 if pfaffian(E.tolist()) > 0 else -1


def top_intersection(T: Torus, E) -> Fraction:
    """``c1^g`` of the class with alternating form ``E``: ``g! * Pf(E)`` in the complex orientation."""
    g = T.g
    return Fraction(math.factorial(g)) * orientation(T) * Fraction(pfaffian(E))


# --------------------------------------------------------------------------
# semirepresentations


@dataclass(frozen=True, eq=False)
class SemiRep:
    """Unitary semirepresentation of the lattice of ``torus`` attached to ``H``."""

    torus: Torus
    H: HermitianForm
    values: tuple

    def __post_init__(self):
        vals = tuple(np.atleast_2d(np.asarray(v, dtype=complex)) for v in self.values)
        if len(vals) != 2 * self.torus.g:
            raise ValueError("one matrix per lattice generator is required")
        r = vals[0].shape[0]
        for G in vals:
            if G.shape != (r, r):
                raise ValueError("semirepresentation values must be square of a common size")
            if np.abs(G.conj().T @ G - np.eye(r)).max() > UNITARY_TOL:
                raise ValueError("semirepresentation values must be unitary")
            G.setflags(write=False)
        if self.H.g != self.torus.g:
            raise InvalidHermitianForm("Hermitian form dimension does not match the torus")
        object.__setattr__(self, "values", vals)

    @property
    def rank(self) -> int:
        return self.values[0].shape[0]

    @cached_property
    def alt_form(self) -> IntAltForm:
        return self.H.alt_form(self.torus)

    def omega(self, n1, n2) -> complex:
        return complex(np.exp(1j * np.pi / self.rank * self.alt_form(n1, n2)))

    def __call__(self, n) -> np.ndarray:
        """``G`` on the lattice vector with integer coordinates ``n``, extended by the cocycle law."""
        n = [int(k) for k in n]
        size = len(n)
        G = np.eye(self.rank, dtype=complex)
        cur = [0] * size
        for k, nk in enumerate(n):
            step = [0] * size
            step[k] = 1 if nk > 0 else -1
            Gk = self.values[k] if nk > 0 else self.values[k].conj().T
            for _ in range(abs(nk)):
                G = G @ Gk * self.omega(cur, step)
                cur[k] += step[k]
        return G

    def factor(self, v, n) -> np.ndarray:
        """Factor of automorphy acting on column vectors of section values."""
        lam = self.torus.lattice_vector(n)
        r = self.rank
        scalar = np.exp(np.pi / r * self.H(v, lam) + np.pi / (2 * r) * self.H(lam, lam))
        return self(n).T * scalar

    def commutation_residual(self) -> float:
        """Max deviation of ``G_k G_l = G_l G_k exp(2 pi i/r E(l, k))`` over basis pairs."""
        size = len(self.values)
        worst = 0.0
        for k in range(size):
            for l in range(size):
                ek = [int(i == k) for i in range(size)]
                el = [int(i == l) for i in range(size)]
                lhs = self.values[k] @ self.values[l]
                rhs = self.values[l] @ self.values[k] * np.exp(2j * np.pi / self.rank * self.alt_form(el, ek))
                worst = max(worst, float(np.abs(lhs - rhs).max()))
        return worst

    def cocycle_residual(self, direct=None) -> float:
        """Max deviation of the cocycle law on all pairs of basis vectors.

        ``direct`` maps integer coordinates to an independently computed
        ``G``; by default the extension by the law itself is used, which
        reduces the check to the commutation relations.
        """
        direct = direct or self
        size = len(self.values)
        worst = self.commutation_residual() if direct is self else 0.0
        for k in range(size):
            for l in range(size):
                ek = [int(i == k) for i in range(size)]
                el = [int(i == l) for i in range(size)]
                s = [a + b for a, b in zip(ek, el)]
                lhs = direct(s)
                rhs = direct(ek) @ direct(el) * self.omega(ek, el)
                worst = max(worst, float(np.abs(lhs - rhs).max()))
        return worst


# --------------------------------------------------------------------------
# bundles


@dataclass(frozen=True, eq=False)
class Explicit:
    semirep: SemiRep


@dataclass(frozen=True, eq=False)
class Pushforward:
    isogeny: Isogeny
    line: LineBundleData


@dataclass(frozen=True, eq=False)
class SHBundle:
    realization: Explicit | Pushforward

    @classmethod
    def explicit(cls, semirep: SemiRep) -> "SHBundle":
        return cls(Explicit(semirep))

    @property
    def rank(self) -> int:
        if isinstance(self.realization, Explicit):
            return self.realization.semirep.rank
        return self.realization.isogeny.degree

    @property
    def torus(self) -> Torus:
        if isinstance(self.realization, Explicit):
            return self.realization.semirep.torus
        return self.realization.isogeny.target

    @cached_property
    def hermitian(self) -> HermitianForm:
        if isinstance(self.realization, Explicit):
            return self.realization.semirep.H
        p = self.realization.isogeny
        return self.realization.line.H.pulled_back(np.linalg.inv(p.linear_map)).scaled(p.degree)

    @cached_property
    def alt_form(self) -> IntAltForm:
        if isinstance(self.realization, Explicit):
            return self.realization.semirep.alt_form
        return pushdown_alt_form(self.realization.isogeny, self.realization.line.alt_form)

    @cached_property
    def kernel_data(self) -> "_KernelData":
        return _KernelData(_require_pushforward(self).isogeny)

    @property
    def is_pushforward(self) -> bool:
        return isinstance(self.realization, Pushforward)

    def to_dict(self) -> dict:
        out = {"rank": self.rank, "alt_form": self.alt_form.as_list()}
        if self.is_pushforward:
            out["isogeny_degree"] = self.realization.isogeny.degree
            out["line_bundle"] = self.realization.line.to_dict()
        return out


def pushdown_alt_form(p: Isogeny, E_src: IntAltForm) -> IntAltForm:
    """``Im`` of ``r (alpha^{-1})^* H'`` on the target lattice: ``r M^{-T} E' M^{-1}``, exactly."""
    r = p.degree
    Minv = _fraction_inverse(p.lattice_matrix)
    n = len(Minv)
    E = E_src.matrix
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            val = r * sum(Minv[a][i] * E[a][b] * Minv[b][j] for a in range(n) for b in range(n))
            if val.denominator != 1:
                raise InvalidHermitianForm("pushed-down alternating form is not integral")
            row.append(int(val))
        out.append(row)
    return IntAltForm(out)


def from_pushforward(p: Isogeny, L: LineBundleData) -> SHBundle:
    if not p.source.same_as(L.torus):
        raise TorusMismatch("line bundle does not live on the isogeny source")
    E = SHBundle(Pushforward(p, L))
    if E.hermitian.alt_form(p.target).matrix != E.alt_form.matrix:
        raise InvalidHermitianForm("pushed-down Hermitian form disagrees with the exact alternating form")
    return E


def is_ample_sh(E: SHBundle) -> bool:
    return is_positive_definite(E.hermitian)


def sh_h0(E: SHBundle) -> int:
    """Dimension of the section space of an ample semihomogeneous bundle.

    For a pushforward this is ``h0`` upstairs; for an explicit bundle it is
    the Euler characteristic ``r (c1/r)^g / g! = Pf(Im H) / r^(g-1)``.
    """
    if not is_ample_sh(E):
        raise NotAmple("h0 is only computed for ample bundles")
    if E.is_pushforward:
        return h0(E.realization.line)
    value = Fraction(abs(E.alt_form.pfaffian()), E.rank ** (E.torus.g - 1))
    if value.denominator != 1:
        raise NonIntegralChernClass("Euler characteristic is not an integer")
    return int(value)


def _require_pushforward(E: SHBundle) -> Pushforward:
    if not isinstance(E.realization, Pushforward):
        raise RealizationMismatch("operation needs a pushforward realization")
    return E.realization


# --------------------------------------------------------------------------
# pushforward structure


class _KernelData:
    def __init__(self, p: Isogeny):
        self.coords = kernel_coords(p)
        self.index = {c: i for i, c in enumerate(self.coords)}
        self.points = [p.source.point(c) for c in self.coords]
        self.minv = _fraction_inverse(p.lattice_matrix)


def _kernel(E: SHBundle) -> _KernelData:
    return E.kernel_data


def direct_semirep_value(E: SHBundle, n) -> np.ndarray:
    """``G(lam)`` of a pushforward computed from the coset permutation, without the cocycle law."""
    real = _require_pushforward(E)
    p, L = real.isogeny, real.line
    K = _kernel(E)
    H = L.H
    src = p.source
    size = len(K.minv)
    y_coords = [sum(K.minv[i][j] * int(n[j]) for j in range(size)) for i in range(size)]
    y = src.point(y_coords)
    r = len(K.coords)
    Gcol = np.zeros((r, r), dtype=complex)
    for j, kappa in enumerate(K.coords):
        total = [a + b for a, b in zip(y_coords, kappa)]
        split = [_floor_frac(t) for t in total]
        lam_int = [s[0] for s in split]
        k = K.index[tuple(s[1] for s in split)]
        xj, xk = K.points[j], K.points[k]
        lam = src.lattice_vector(lam_int)
        c = (
            -H(y, xj)
            - 0.5 * H(xj, xj)
            + H(xk, lam)
            + 0.5 * H(lam, lam)
            + 0.5 * H(xk, xk)
            - 0.5 * H(y, y)
        )
        Gcol[j, k] = L.chi(lam_int) * np.exp(1j * np.pi * np.imag(c))
    return Gcol.T


def synthesize_semirep(E: SHBundle) -> SemiRep:
    """Explicit semirepresentation realising a pushforward, in the kernel ordering."""
    _require_pushforward(E)
    size = 2 * E.torus.g
    values = tuple(direct_semirep_value(E, [int(i == k) for i in range(size)]) for k in range(size))
    return SemiRep(E.torus, E.hermitian, values)


def as_explicit(E: SHBundle) -> SHBundle:
    if isinstance(E.realization, Explicit):
        return E
    return SHBundle.explicit(synthesize_semirep(E))


def pullback_split(sigma: Isogeny, E: SHBundle) -> list[LineBundleData]:
    """``sigma^* sigma_* L`` as the translates ``t_x^* L`` over the kernel, in kernel order."""
    real = _require_pushforward(E)
    if real.isogeny is not sigma and not (
        real.isogeny.lattice_matrix == sigma.lattice_matrix
        and real.isogeny.source.same_as(sigma.source)
        and real.isogeny.target.same_as(sigma.target)
    ):
        raise RealizationMismatch("bundle is not a pushforward along this isogeny")
    return [translate(real.line, x) for x in _kernel(E).points]


class PushforwardSections:
    """Sections of ``p_* L`` as ``C^r``-valued functions on the target cover.

    Component ``j`` at ``v`` is the section of ``t_{x_j}^* L`` at
    ``u = alpha^{-1} v``, i.e. ``exp(-pi H'(u, x_j) - pi/2 H'(x_j, x_j)) f(u + x_j)``.
    """

    def __init__(self, E: SHBundle):
        real = _require_pushforward(E)
        self.bundle = E
        self.basis = section_basis(real.line)
        self.isogeny = real.isogeny
        self.rank = E.rank
        self.torus = E.torus
        self.hermitian = E.hermitian
        self.semirep = synthesize_semirep(E)
        self._kernel = _kernel(E).points
        self._alpha_inv = np.linalg.inv(real.isogeny.linear_map)

    def __len__(self) -> int:
        return len(self.basis)

    def factor(self, v, n) -> np.ndarray:
        return self.semirep.factor(v, n)

    def evaluate(self, points, tp: TruncationParams | None = None, normalized: bool = False) -> np.ndarray:
        """Values at ``points``; shape ``(P, h0 * r)`` laid out section-major."""
        pts = np.asarray(points, dtype=complex).reshape(-1, self.torus.g)
        u = pts @ self._alpha_inv.T
        H = self.basis.bundle.H
        out = np.empty((pts.shape[0], len(self), self.rank), dtype=complex)
        for j, x in enumerate(self._kernel):
            vals = self.basis.evaluate(u + x[None, :], tp)
            scale = -np.pi * H(u, x[None, :]) - np.pi / 2 * H(x, x)
            if normalized:
                scale = scale - np.pi / 2 * H(u, u).real
            out[:, :, j] = vals * np.exp(scale)[:, None]
        return out.reshape(pts.shape[0], -1)


def preimages(E: SHBundle, a) -> list[np.ndarray]:
    """Fiber gauge: ``b_0`` reduced into the source domain, then ``b_0 + x_j`` in kernel order."""
    real = _require_pushforward(E)
    b0 = reduce_mod_lattice(real.isogeny.source, real.isogeny.preimage(np.asarray(a, dtype=complex).reshape(-1)))
    return [b0 + x for x in _kernel(E).points]


def fiber_eval(E: SHBundle, a, tp: TruncationParams | None = None, normalized: bool = False) -> np.ndarray:
    """Evaluation map ``H^0(E) -> E_a`` as an ``h0 x r`` matrix over the preimages of ``a``."""
    real = _require_pushforward(E)
    B = section_basis(real.line)
    pts = np.array(preimages(E, a))
    return B.evaluate(pts, tp, normalized).T


@dataclass(frozen=True, eq=False)
class TensorSummand:
    shifts: tuple[int, ...]
    bundle: LineBundleData
    basis: ThetaBasis

    @property
    def h0(self) -> int:
        return len(self.basis)


def tensor_power_sections(E: SHBundle, m: int) -> list[TensorSummand]:
    """``H^0(E^{(x) m})`` as the sum over ``(x_2..x_m)`` of ``H^0(L (x) t_{x_2}^*L (x) ...)``.

    ``shifts`` holds kernel indices. The fiber of each summand over ``a`` is
    spanned by the preimages ``b_j`` in the gauge of :func:`preimages`.
    """
    real = _require_pushforward(E)
    if m < 1:
        raise ValueError("tensor power must be positive")
    if not is_ample(real.line):
        raise NotAmple("tensor power sections need an ample bundle")
    K = _kernel(E)
    translates = [translate(real.line, x) for x in K.points]
    out = []
    for shifts in itertools.product(range(len(K.points)), repeat=m - 1):
        Lt = real.line
        for s in shifts:
            Lt = tensor(Lt, translates[s])
        out.append(TensorSummand(shifts, Lt, section_basis(Lt)))
    return out


def verify_semihomogeneity(E: SHBundle, a, samples: int = 50, seed: int = 0) -> float:
    """Max relative residual of ``J(v + a, lam) = J(v, lam) exp(pi H(a/r, lam))``."""
    if not isinstance(E.realization, Explicit):
        raise RealizationMismatch("semihomogeneity is verified on explicit realizations")
    S = E.realization.semirep
    T = S.torus
    r = S.rank
    a = np.asarray(a, dtype=complex).reshape(T.g)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        v = T.point(rng.random(2 * T.g))
        n = rng.integers(-3, 4, size=2 * T.g)
        lam = T.lattice_vector(n)
        lhs = S.factor(v + a, n)
        rhs = S.factor(v, n) * np.exp(np.pi * S.H(a / r, lam))
        worst = max(worst, float(np.abs(lhs - rhs).max() / np.abs(lhs).max()))
    return worst


# --------------------------------------------------------------------------
# Chern arithmetic


@dataclass(frozen=True)
class ChernTotal:
    rank: int
    dim: int
    coefficients: tuple[Fraction, ...]
    c1_squared: int | None = None
    c2: int | None = None

    def to_dict(self) -> dict:
        return {
            "rank": self.rank,
            "dim": self.dim,
            "coefficients": [str(c) for c in self.coefficients],
            "c1_squared": self.c1_squared,
            "c2": self.c2,
        }


def chern_total(r: int, c1_squared: int | None = None, dim: int = 2, c1=None, gram=None) -> ChernTotal:
    """``c(E) = (1 + c1/r)^r``: ``c_i = C(r, i) r^{-i} c1^i`` for ``i <= dim``.

    On a surface with ``c1^2`` known (directly or as ``c1 . gram . c1``) the
    second Chern number is returned and must be integral.
    """
    if r < 1:
        raise ValueError("rank must be positive")
    if c1 is not None and gram is not None:
        c1_squared = int(sum(c1[i] * gram[i][j] * c1[j] for i in range(len(c1)) for j in range(len(c1))))
    coeffs = tuple(Fraction(math.comb(r, i), r**i) for i in range(min(r, dim) + 1))
    c2 = None
    if dim == 2 and c1_squared is not None:
        val = Fraction(r - 1, 2 * r) * c1_squared
        if val.denominator != 1:
            raise NonIntegralChernClass(f"c2 = {val} is not an integer")
        c2 = int(val)
    return ChernTotal(r, dim, coeffs, c1_squared, c2)


def chi_surface_consistency(p: Isogeny, L: LineBundleData) -> dict:
    """Exact Chern/Euler identities for ``E = p_* L`` on an abelian surface."""
    if p.g != 2:
        raise HypothesisNotMet("surface identities need g = 2")
    if not is_ample(L):
        raise NotAmple("L must be ample")
    E = from_pushforward(p, L)
    r = E.rank
    c1L_sq = top_intersection(p.source, L.alt_form.matrix)
    c1E_sq = top_intersection(p.target, E.alt_form.matrix)
    ch = chern_total(r, int(c1E_sq))
    chi_E = c1E_sq / 2 - ch.c2
    chi_L = h0(L)
    report = {
        "rank": r,
        "c1_L_squared": int(c1L_sq),
        "c1_E_squared": int(c1E_sq),
        "c2_E": ch.c2,
        "chi_E": int(chi_E),
        "c1_E_squared_over_2r": str(c1E_sq / (2 * r)),
        "h0_L": chi_L,
    }
    if c1E_sq != r * c1L_sq:
        raise IdentityViolation(f"c1(E)^2 = {c1E_sq} but r c1(L)^2 = {r * c1L_sq}")
    if chi_E != c1E_sq / (2 * r):
        raise IdentityViolation(f"chi(E) = {chi_E} but c1(E)^2/2r = {c1E_sq / (2 * r)}")
    if chi_E != chi_L:
        raise IdentityViolation(f"chi(E) = {chi_E} but h0(L) = {chi_L}")
    report["passed"] = True
    return report
