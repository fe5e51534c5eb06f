"""Theta-series evaluation of sections of ample line bundles.

Sections are reported in the Appell-Humbert trivialization, i.e. they satisfy
``f(v + lam) = J(v, lam) f(v)`` with the factor of
:meth:`LineBundleData.factor`. For the symplectic basis ``lambda_i, mu_i``
of ``Im H`` put ``e_i = mu_i / d_i`` and write ``v = Emat z``. Then

    f_c(v) = exp(pi/2 B(v, v)) * sum_{n in c + Z^g} exp(pi i n.Z n + 2 pi i n.z)

for ``c in D^{-1} Z^g / Z^g``, where ``B`` is the symmetric C-bilinear form
agreeing with ``H`` on the real span of the ``mu_i``. A bundle with a
semicharacter other than the canonical one is a translate of the canonical
bundle and its sections are translated accordingly.

Values ``f(v) * exp(-pi/2 H(v, v))`` ("normalized" values) are bounded and
Lambda-invariant in modulus; the truncation certificate bounds their error.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import mpmath
import numpy as np
from scipy.special import gamma, gammaincc

from .appell_humbert import LineBundleData, Semicharacter, h0, is_ample
from .errors import NotAmple, TruncationInsufficient

DEFAULT_TAIL_BOUND = 1e-12
_CHUNK = 2048


def gaussian_tail_bound(radius: float, min_eig: float, g: int) -> float:
    """Upper bound for ``sum exp(-pi min_eig |n - x0|^2)`` over the lattice
    points ``n in c + Z^g`` outside the enumeration set.

    The enumeration set is the Euclidean ball of ``radius`` around the
    nearest coset point to ``x0``, so every omitted point lies farther than
    ``radius - s`` from ``x0`` with ``s = sqrt(g)/2``. Comparing each omitted
    term with the integral over its unit cube gives
    ``S_{g-1} int_{a}^inf exp(-c u^2) (u + s)^{g-1} du`` with
    ``a = radius - 3 s`` and ``c = pi min_eig``.
    """
    s = math.sqrt(g) / 2
    a = radius - 3 * s
    if a < 0:
        return math.inf
    c = math.pi * min_eig
    sphere = 2 * math.pi ** (g / 2) / math.gamma(g / 2)
    total = 0.0
    for k in range(g):
        half = (k + 1) / 2
        upper = gammaincc(half, c * a * a) * gamma(half)
        total += math.comb(g - 1, k) * s ** (g - 1 - k) * upper / (2 * c**half)
    return sphere * total


@dataclass(frozen=True)
class TruncationParams:
    tail_bound: float = DEFAULT_TAIL_BOUND
    radius: int | None = None

    def __post_init__(self):
        if not self.tail_bound > 0:
            raise ValueError("tail bound must be positive")
        if self.radius is not None and self.radius < 1:
            raise ValueError("radius must be a positive integer")

    def certify(self, min_eig: float, g: int) -> int:
        """Enumeration radius certifying ``tail_bound`` for the given form."""
        if self.radius is not None:
            bound = gaussian_tail_bound(self.radius, min_eig, g)
            if bound > self.tail_bound:
                raise TruncationInsufficient(
                    f"radius {self.radius} only certifies a tail of {bound:.3e} > {self.tail_bound:.3e}"
                )
            return self.radius
        R = max(1, math.ceil(1.5 * math.sqrt(g)))
        while gaussian_tail_bound(R, min_eig, g) > self.tail_bound:
            R += 1
        return R


class ThetaBasis:
    """Basis of sections of an ample line bundle, indexed by characteristics."""

    rank = 1

    def __init__(self, bundle: LineBundleData):
        if not is_ample(bundle):
            raise NotAmple("sections are only constructed for ample bundles")
        self.bundle = bundle
        T = bundle.torus
        g = T.g
        divisors, basis = bundle.symplectic
        self.divisors = divisors
        self.decomposition = basis
        Bm = np.array(basis, dtype=float)
        lam = T.period_matrix @ Bm[:, :g]
        mu = T.period_matrix @ Bm[:, g:]
        emat = mu / np.array(divisors, dtype=float)[None, :]
        self._emat_inv = np.linalg.inv(emat)
        Z = self._emat_inv @ lam
        Z = (Z + Z.T) / 2
        self.period = Z
        Y = Z.imag
        self._Y_inv = np.linalg.inv(Y)
        self.min_eig = float(np.linalg.eigvalsh(Y).min())
        self.characteristics = [
            tuple(k / d for k, d in zip(ks, divisors))
            for ks in itertools.product(*(range(d) for d in divisors))
        ]
        if len(self.characteristics) != h0(bundle):
            raise AssertionError("characteristic count differs from h0")
        self._chars = np.array(self.characteristics, dtype=float).reshape(-1, g)
        self.shift = self._translation_to_canonical()

    def __len__(self) -> int:
        return len(self.characteristics)

    @property
    def hermitian(self):
        return self.bundle.H

    @property
    def torus(self):
        return self.bundle.torus

    def factor(self, v, n) -> np.ndarray:
        return np.array([[self.bundle.factor(v, n)]])

    def _translation_to_canonical(self) -> np.ndarray:
        """Point ``a`` with ``L = t_a^* L0``, ``L0`` carrying the canonical semicharacter."""
        L = self.bundle
        chi0 = Semicharacter.canonical(L.alt_form, self.decomposition)
        phases = np.array([np.angle(c / c0) / (2 * np.pi) for c, c0 in zip(L.chi.values, chi0.values)])
        E = L.alt_form.as_array()
        x = np.linalg.solve(E.T, phases)
        x = x - np.floor(x)
        return L.torus.point(x)

    def certified_radius(self, tp: TruncationParams) -> int:
        return tp.certify(self.min_eig, self.torus.g)

    @cached_property
    def _ball_cache(self) -> dict:
        return {}

    def _terms(self, radius: int) -> tuple[np.ndarray, np.ndarray]:
        """Steps ``-R..R`` and the Gaussian weights ``exp(pi i l.Z l)`` on the box, zero outside the ball."""
        if radius not in self._ball_cache:
            g = self.torus.g
            steps = np.arange(-radius, radius + 1, dtype=float)
            box = np.array(list(itertools.product(steps, repeat=g))).reshape(-1, g)
            inside = (box**2).sum(axis=1) <= radius * radius
            weights = np.where(inside, np.exp(1j * np.pi * np.einsum("tg,gh,th->t", box, self.period, box)), 0)
            self._ball_cache[radius] = (steps, weights.reshape((steps.shape[0],) * g))
        return self._ball_cache[radius]

    def evaluate(self, points, tp: TruncationParams | None = None, normalized: bool = False) -> np.ndarray:
        """Section values at ``points`` (shape ``(P, g)``); returns ``(P, h0)``."""
        tp = tp or TruncationParams()
        R = self.certified_radius(tp)
        pts = np.asarray(points, dtype=complex).reshape(-1, self.torus.g)
        out = np.empty((pts.shape[0], len(self)), dtype=complex)
        for start in range(0, pts.shape[0], _CHUNK):
            out[start : start + _CHUNK] = self._evaluate_chunk(pts[start : start + _CHUNK], R, normalized)
        return out

    def _evaluate_chunk(self, v: np.ndarray, R: int, normalized: bool) -> np.ndarray:
        H = self.bundle.H
        a = self.shift
        w = v + a[None, :]
        z = w @ self._emat_inv.T
        bz = np.einsum("pi,ij,pj->p", z, self._Y_inv, z)
        log_pre = -np.pi * H(v, a[None, :]) - np.pi / 2 * H(a, a) + np.pi / 2 * bz
        if normalized:
            log_pre = log_pre - np.pi / 2 * H(v, v).real
        center = -(z.imag @ self._Y_inv.T)
        chars = self._chars
        base = chars[None, :, :] + np.rint(center[:, None, :] - chars[None, :, :])
        steps, weights = self._terms(R)
        # n = base + l: n.Z n + 2 n.z = (base terms) + 2 l.(Z base + z) + l.Z l; the middle
        # factor splits over coordinates, so the sum over the box is a tensor contraction
        bZ = base @ self.period
        const = 1j * np.pi * (np.einsum("pcg,pcg->pc", bZ, base) + 2 * np.einsum("pcg,pg->pc", base, z))
        const = const + log_pre[:, None]
        W = bZ + z[:, None, :]
        Q = np.exp(2j * np.pi * W[..., None] * steps)
        g = self.torus.g
        P, C = base.shape[:2]
        b = steps.shape[0]
        acc = Q[:, :, g - 1, :] @ weights.reshape(-1, b).T
        for k in range(g - 2, -1, -1):
            acc = (acc.reshape(P, C, -1, b) * Q[:, :, k, None, :]).sum(axis=-1)
        return np.exp(const) * acc.reshape(P, C)

    def evaluate_mp(self, v, dps: int = 30, box: int = 12) -> list:
        """High-precision evaluation by brute summation over a box (oracle use only)."""
        with mpmath.workdps(dps):
            g = self.torus.g
            H = self.bundle.H.matrix
            to_mpc = lambda x: mpmath.mpc(complex(x).real, complex(x).imag)  # noqa: E731
            vv = [to_mpc(x) for x in np.ravel(v)]
            a = [to_mpc(x) for x in self.shift]
            w = [vv[i] + a[i] for i in range(g)]
            Einv = self._emat_inv
            z = [mpmath.fsum(to_mpc(Einv[i, j]) * w[j] for j in range(g)) for i in range(g)]

            def herm(x, y):
                return mpmath.fsum(mpmath.conj(y[k]) * to_mpc(H[k, j]) * x[j] for k in range(g) for j in range(g))

            bz = mpmath.fsum(z[i] * to_mpc(self._Y_inv[i, j]) * z[j] for i in range(g) for j in range(g))
            pre = mpmath.exp(-mpmath.pi * herm(vv, a) - mpmath.pi / 2 * herm(a, a) + mpmath.pi / 2 * bz)
            Zm = [[to_mpc(self.period[i, j]) for j in range(g)] for i in range(g)]
            out = []
            for c in self.characteristics:
                total = mpmath.mpc(0)
                for l in itertools.product(range(-box, box + 1), repeat=g):
                    n = [mpmath.mpf(l[i]) + mpmath.mpf(c[i]) for i in range(g)]
                    quad = mpmath.fsum(n[i] * Zm[i][j] * n[j] for i in range(g) for j in range(g))
                    lin = mpmath.fsum(n[i] * z[i] for i in range(g))
                    total += mpmath.exp(1j * mpmath.pi * quad + 2j * mpmath.pi * lin)
                out.append(pre * total)
            return out


def section_basis(L: LineBundleData) -> ThetaBasis:
    return ThetaBasis(L)


def eval_sections(B: ThetaBasis, v, tp: TruncationParams | None = None, normalized: bool = False) -> np.ndarray:
    """Values of all basis sections at a single point ``v``; length ``h0``."""
    return B.evaluate(np.asarray(v, dtype=complex).reshape(1, -1), tp, normalized)[0]


def metric_weight(H, r: int, v) -> float:
    """Scalar of the metric ``h(v) = exp(-(pi/r) H(v, v)) Id_r``."""
    return float(np.exp(-np.pi / r * np.real(H(v, v))))


def _values(sections, v, tp):
    vals = sections.evaluate(np.asarray(v, dtype=complex).reshape(1, -1), tp)[0]
    return vals.reshape(len(sections), -1)


def check_automorphy(sections, v, n, tp: TruncationParams | None = None, bundle: LineBundleData | None = None) -> float:
    """Max residual of ``f(v + lam) - J(v, lam) f(v)`` over the basis.

    ``n`` are the integer lattice coordinates of ``lam``. The residual is
    measured in the metric norm at ``v + lam`` (weight
    ``exp(-pi/(2r) H(v+lam, v+lam))``) so that it does not grow with ``|v|``.
    ``bundle`` replaces the line bundle whose factor is used (for detection
    tests with a perturbed semicharacter).
    """
    v = np.asarray(v, dtype=complex).reshape(-1)
    lam = sections.torus.lattice_vector(n)
    J = bundle.factor(v, n) * np.eye(1) if bundle is not None else sections.factor(v, n)
    fv = _values(sections, v, tp)
    fl = _values(sections, v + lam, tp)
    resid = fl - fv @ J.T
    weight = math.sqrt(metric_weight(sections.hermitian, sections.rank, v + lam))
    return float(np.abs(resid).max() * weight)


def hermitian_pairing(sections, i: int, j: int, v, tp: TruncationParams | None = None) -> complex:
    """``<f_i, f_j>(v) = f_i(v)^* h(v) f_j(v)``."""
    vals = _values(sections, v, tp)
    return complex(np.vdot(vals[i], vals[j]) * metric_weight(sections.hermitian, sections.rank, v))


def pairing_periodicity_check(sections, i: int, j: int, v, n, tp: TruncationParams | None = None) -> float:
    v = np.asarray(v, dtype=complex).reshape(-1)
    lam = sections.torus.lattice_vector(n)
    return abs(hermitian_pairing(sections, i, j, v + lam, tp) - hermitian_pairing(sections, i, j, v, tp))


def curvature_fd(H, r: int, v, step: float = 1e-4) -> np.ndarray:
    """Finite-difference ``d/dv_j d/dvbar_k`` of ``-log h(v)``; entry ``[k, j]``."""
    v = np.asarray(v, dtype=complex).reshape(-1)
    g = v.shape[0]

    def phi(x):
        return -math.log(metric_weight(H, r, x))

    def shift(k, part, t):
        e = np.zeros(g, dtype=complex)
        e[k] = t if part == 0 else 1j * t
        return e

    def mixed(a, b):
        h = step
        return (
            phi(v + shift(*a, h) + shift(*b, h))
            - phi(v + shift(*a, h) - shift(*b, h))
            - phi(v - shift(*a, h) + shift(*b, h))
            + phi(v - shift(*a, h) - shift(*b, h))
        ) / (4 * h * h)

    out = np.empty((g, g), dtype=complex)
    for j in range(g):
        for k in range(g):
            xx = mixed((j, 0), (k, 0))
            yy = mixed((j, 1), (k, 1))
            xy = mixed((j, 0), (k, 1))
            yx = mixed((j, 1), (k, 0))
            out[k, j] = 0.25 * (xx + yy + 1j * (xy - yx))
    return out
