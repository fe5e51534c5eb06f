"""Complex tori, integral lattices and isogenies.

Lattice data (alternating forms, isogeny matrices, kernel cosets) is kept in
exact Python integers / fractions. Only the period matrices are floating
point; they are checked against the integer data with ``CONSISTENCY_TOL``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

import numpy as np

from .errors import DegenerateForm, InvalidIsogeny, InvalidTorus

CONSISTENCY_TOL = 1e-10
# fractional parts this close to 1 are snapped to 0
_FRAC_SNAP = 1e-12


IntMatrix = list[list[int]]


def as_int_matrix(a) -> IntMatrix:
    rows = [[int(x) for x in row] for row in np.asarray(a, dtype=object).tolist()]
    for row in rows:
        if len(row) != len(rows):
            raise ValueError("expected a square integer matrix")
    return rows


def _identity(n: int) -> IntMatrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def _matmul(a, b):
    return [
        [sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0]))]
        for i in range(len(a))
    ]


def _transpose(a):
    return [list(col) for col in zip(*a)]


def int_det(a) -> int:
    """Exact determinant of an integer matrix (Bareiss elimination)."""
    m = [list(map(int, row)) for row in a]
    n = len(m)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def pfaffian(a):
    """Exact Pfaffian of an alternating matrix of ints or Fractions (recursive expansion)."""
    m = [list(row) for row in a]
    n = len(m)
    if n % 2:
        return 0
    if n == 0:
        return 1
    total = 0
    for j in range(1, n):
        if m[0][j] == 0:
            continue
        keep = [k for k in range(1, n) if k != j]
        minor = [[m[r][c] for c in keep] for r in keep]
        total += (-1) ** (j + 1) * m[0][j] * pfaffian(minor)
    return total


# --------------------------------------------------------------------------
# normal forms


def smith_normal_form(a) -> tuple[list[int], IntMatrix, IntMatrix]:
    """Smith normal form ``U @ A @ V = diag(s)`` of a square integer matrix.

    Returns the invariant factors ``s`` (nonnegative, each dividing the next)
    and the unimodular matrices ``U`` and ``V``.
    """
    A = as_int_matrix(a)
    n = len(A)
    U = _identity(n)
    V = _identity(n)

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for M in (A, V):
            for row in M:
                row[i], row[j] = row[j], row[i]

    def add_row(dst, src, c):
        for M in (A, U):
            M[dst] = [x + c * y for x, y in zip(M[dst], M[src])]

    def add_col(dst, src, c):
        for M in (A, V):
            for row in M:
                row[dst] += c * row[src]

    for s in range(n):
        while True:
            nz = [(abs(A[i][j]), i, j) for i in range(s, n) for j in range(s, n) if A[i][j]]
            if not nz:
                break
            _, i, j = min(nz)
            swap_rows(s, i)
            swap_cols(s, j)
            p = A[s][s]
            dirty = False
            for i in range(s + 1, n):
                if A[i][s]:
                    add_row(i, s, -(A[i][s] // p))
                    dirty |= A[i][s] != 0
            for j in range(s + 1, n):
                if A[s][j]:
                    add_col(j, s, -(A[s][j] // p))
                    dirty |= A[s][j] != 0
            if dirty:
                continue
            bad = next(
                ((i, j) for i in range(s + 1, n) for j in range(s + 1, n) if A[i][j] % p),
                None,
            )
            if bad is None:
                break
            add_row(s, bad[0], 1)
        if A[s][s] < 0:
            U[s] = [-x for x in U[s]]
            A[s] = [-x for x in A[s]]
    return [A[i][i] for i in range(n)], U, V


@dataclass(frozen=True)
class IntAltForm:
    """Integer alternating form ``E`` on a rank-2g lattice."""

    matrix: tuple[tuple[int, ...], ...]

    def __init__(self, matrix):
        m = as_int_matrix(matrix)
        n = len(m)
        if n % 2:
            raise ValueError("alternating form must have even size")
        for i in range(n):
            for j in range(n):
                if m[i][j] != -m[j][i]:
                    raise ValueError("matrix is not alternating (E^T != -E)")
        object.__setattr__(self, "matrix", tuple(tuple(r) for r in m))

    @property
    def size(self) -> int:
        return len(self.matrix)

    def as_list(self) -> IntMatrix:
        return [list(r) for r in self.matrix]

    def as_array(self) -> np.ndarray:
        return np.array(self.matrix, dtype=float)

    def __call__(self, x, y) -> int:
        return sum(x[i] * self.matrix[i][j] * y[j] for i in range(self.size) for j in range(self.size))

    def pfaffian(self) -> int:
        return pfaffian(self.matrix)

    def __add__(self, other: "IntAltForm") -> "IntAltForm":
        return IntAltForm([[a + b for a, b in zip(r, s)] for r, s in zip(self.matrix, other.matrix)])

    def scaled(self, k: int) -> "IntAltForm":
        return IntAltForm([[k * a for a in r] for r in self.matrix])

    def transformed(self, basis) -> "IntAltForm":
        """Gram matrix ``B^T E B`` in a new basis given by the columns of ``B``."""
        B = as_int_matrix(basis)
        return IntAltForm(_matmul(_matmul(_transpose(B), self.as_list()), B))


def standard_block(divisors) -> IntMatrix:
    g = len(divisors)
    m = [[0] * (2 * g) for _ in range(2 * g)]
    for i, d in enumerate(divisors):
        m[i][g + i] = d
        m[g + i][i] = -d
    return m


def frobenius_normal_form(E: IntAltForm | IntMatrix) -> tuple[list[int], IntMatrix]:
    """Symplectic (Frobenius) normal form of a nondegenerate alternating form.

    Returns ``(divisors, B)`` with ``B`` unimodular and
    ``B^T E B = [[0, D], [-D, 0]]``, ``D = diag(divisors)``, ``d_i | d_{i+1}``.
    Columns ``0..g-1`` of ``B`` are the lambda-part of the symplectic basis,
    columns ``g..2g-1`` the mu-part, with ``E(lambda_i, mu_i) = d_i``.
    """
    if not isinstance(E, IntAltForm):
        E = IntAltForm(E)
    n = E.size
    if int_det(E.matrix) == 0:
        raise DegenerateForm("alternating form is degenerate (det = 0)")
    A = E.as_list()
    B = _identity(n)

    def swap(i, j):
        if i == j:
            return
        A[i], A[j] = A[j], A[i]
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in B:
            row[i], row[j] = row[j], row[i]

    def add(dst, src, c):
        # basis vector e_dst += c * e_src  (congruence on both sides)
        A[dst] = [x + c * y for x, y in zip(A[dst], A[src])]
        for row in A:
            row[dst] += c * row[src]
        for row in B:
            row[dst] += c * row[src]

    divisors = []
    for p in range(0, n, 2):
        q = p + 1
        while True:
            _, i, j = min(
                (abs(A[i][j]), i, j) for i in range(p, n) for j in range(p, n) if A[i][j]
            )
            swap(p, i)
            if j == p:
                j = i
            swap(q, j)
            d = A[p][q]
            dirty = False
            for k in range(q + 1, n):
                if A[p][k]:
                    add(k, q, -(A[p][k] // d))
                    dirty |= A[p][k] != 0
                if A[q][k]:
                    add(k, p, A[q][k] // d)
                    dirty |= A[q][k] != 0
            if dirty:
                continue
            bad = next(
                ((i, j) for i in range(q + 1, n) for j in range(q + 1, n) if A[i][j] % d),
                None,
            )
            if bad is None:
                break
            add(p, bad[0], 1)
        if A[p][q] < 0:
            for row in B:
                row[q] = -row[q]
            A[q] = [-x for x in A[q]]
            for row in A:
                row[q] = -row[q]
        divisors.append(A[p][q])
    order = list(range(0, n, 2)) + list(range(1, n, 2))
    B = [[row[c] for c in order] for row in B]
    return divisors, B


# --------------------------------------------------------------------------
# tori


def _complex_matrix(a, rows: int | None = None) -> np.ndarray:
    arr = np.asarray(a, dtype=complex)
    if arr.ndim == 1 and rows == 1:
        arr = arr.reshape(1, -1)
    return arr


@dataclass(frozen=True, eq=False)
class Torus:
    """Complex torus ``V/Lambda`` with ``Lambda`` spanned by the period columns."""

    period_matrix: np.ndarray
    _real_inverse: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        P = _complex_matrix(self.period_matrix, rows=1)
        if P.ndim != 2 or P.shape[1] != 2 * P.shape[0] or P.shape[0] < 1:
            raise InvalidTorus(f"period matrix must be g x 2g, got shape {P.shape}")
        R = np.vstack([P.real, P.imag])
        if np.linalg.matrix_rank(R, tol=1e-12 * max(1.0, np.abs(R).max())) < R.shape[0]:
            raise InvalidTorus("period columns are not R-linearly independent")
        P = P.copy()
        P.setflags(write=False)
        object.__setattr__(self, "period_matrix", P)
        inv = np.linalg.inv(R)
        inv.setflags(write=False)
        object.__setattr__(self, "_real_inverse", inv)

    @property
    def g(self) -> int:
        return self.period_matrix.shape[0]

    @classmethod
    def elliptic(cls, tau: complex) -> "Torus":
        return cls([[1.0, tau]])

    @classmethod
    def product(cls, *tori: "Torus") -> "Torus":
        """Product torus; lattice basis ordered (all first halves, all second halves)."""
        g = sum(t.g for t in tori)
        P = np.zeros((g, 2 * g), dtype=complex)
        row = 0
        for t in tori:
            P[row : row + t.g, row : row + t.g] = t.period_matrix[:, : t.g]
            P[row : row + t.g, g + row : g + row + t.g] = t.period_matrix[:, t.g :]
            row += t.g
        return cls(P)

    def lattice_coords(self, v) -> np.ndarray:
        """Real coordinates ``x`` with ``v = period_matrix @ x``."""
        v = np.asarray(v, dtype=complex)
        stacked = np.concatenate([v.real, v.imag], axis=-1)
        return stacked @ self._real_inverse.T

    def point(self, x) -> np.ndarray:
        """Point of ``V`` with the given lattice coordinates (rationals allowed)."""
        x = np.asarray(x)
        return x.astype(float) @ self.period_matrix.T

    def lattice_vector(self, n) -> np.ndarray:
        return np.asarray(n, dtype=float) @ self.period_matrix.T

    def same_as(self, other: "Torus") -> bool:
        return self is other or (
            self.period_matrix.shape == other.period_matrix.shape
            and np.allclose(self.period_matrix, other.period_matrix, atol=CONSISTENCY_TOL, rtol=0)
        )

    def to_dict(self) -> dict:
        return {
            "g": self.g,
            "period_matrix": [[[z.real, z.imag] for z in row] for row in self.period_matrix],
        }


def reduce_mod_lattice(T: Torus, v) -> np.ndarray:
    """Representative of ``v`` mod the lattice with coordinates in ``[0, 1)``."""
    x = T.lattice_coords(v)
    frac = x - np.floor(x)
    frac[np.abs(frac - 1.0) < _FRAC_SNAP] = 0.0
    frac[np.abs(frac) < _FRAC_SNAP] = 0.0
    return T.point(frac)


def torsion_coords(g: int, n: int) -> list[tuple[Fraction, ...]]:
    """Lattice coordinates of the ``n``-torsion points, lexicographic order."""
    if n < 1:
        raise ValueError("torsion order must be positive")
    return [tuple(Fraction(k, n) for k in ks) for ks in itertools.product(range(n), repeat=2 * g)]


def torsion_points(T: Torus, n: int) -> list[np.ndarray]:
    return [T.point(c) for c in torsion_coords(T.g, n)]


# --------------------------------------------------------------------------
# isogenies


@dataclass(frozen=True, eq=False)
class Isogeny:
    """Isogeny ``p: source -> target`` induced by a linear map ``alpha``.

    ``lattice_matrix`` ``M`` expresses the images of the source lattice basis
    in the target basis: ``alpha @ Pi_source = Pi_target @ M``.
    """

    source: Torus
    target: Torus
    linear_map: np.ndarray
    lattice_matrix: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.source.g != self.target.g:
            raise InvalidIsogeny("source and target dimensions differ")
        g = self.target.g
        alpha = np.asarray(self.linear_map, dtype=complex).reshape(g, g)
        alpha.setflags(write=False)
        object.__setattr__(self, "linear_map", alpha)
        M = as_int_matrix(self.lattice_matrix)
        if len(M) != 2 * g:
            raise InvalidIsogeny("lattice matrix must be 2g x 2g")
        object.__setattr__(self, "lattice_matrix", tuple(tuple(r) for r in M))
        if int_det(M) == 0:
            raise InvalidIsogeny("lattice matrix is singular")
        lhs = alpha @ self.source.period_matrix
        rhs = self.target.period_matrix @ np.array(M, dtype=float)
        scale = max(1.0, float(np.abs(rhs).max()))
        if np.abs(lhs - rhs).max() > CONSISTENCY_TOL * scale:
            raise InvalidIsogeny("alpha @ Pi_source != Pi_target @ M")

    @property
    def degree(self) -> int:
        return abs(int_det(self.lattice_matrix))

    @property
    def g(self) -> int:
        return self.target.g

    @classmethod
    def identity(cls, T: Torus) -> "Isogeny":
        return cls(T, T, np.eye(T.g), _identity(2 * T.g))

    @classmethod
    def multiplication(cls, T: Torus, n: int) -> "Isogeny":
        return cls(T, T, n * np.eye(T.g), [[n * x for x in r] for r in _identity(2 * T.g)])

    @classmethod
    def from_sublattice(cls, target: Torus, M) -> "Isogeny":
        """The quotient map ``V/Lambda' -> V/Lambda`` with ``Lambda' = Pi M Z^2g``."""
        M = as_int_matrix(M)
        source = Torus(target.period_matrix @ np.array(M, dtype=float))
        return cls(source, target, np.eye(target.g), M)

    def push_point(self, u) -> np.ndarray:
        return np.asarray(u, dtype=complex) @ self.linear_map.T

    def preimage(self, v) -> np.ndarray:
        """One preimage ``alpha^{-1} v`` in the source universal cover."""
        return np.linalg.solve(self.linear_map, np.asarray(v, dtype=complex).T).T


def kernel_coords(p: Isogeny) -> list[tuple[Fraction, ...]]:
    """Kernel of ``p`` as source lattice coordinates in ``[0, 1)``.

    The kernel is ``M^{-1} Z^{2g} / Z^{2g}``. With ``U M V = S`` it is
    parametrised by ``V S^{-1} k``, ``0 <= k_i < s_i``; representatives are
    listed in lexicographic order of ``k``.
    """
    s, _, V = smith_normal_form(p.lattice_matrix)
    n = len(s)
    points = []
    for k in itertools.product(*(range(si) for si in s)):
        y = [sum(Fraction(V[i][j] * k[j], s[j]) for j in range(n)) for i in range(n)]
        points.append(tuple(t - (t.numerator // t.denominator) for t in y))
    return points


def kernel_points(p: Isogeny) -> list[np.ndarray]:
    """Kernel points of ``p`` in the source ``V'``, reduced to the fundamental domain."""
    return [p.source.point(c) for c in kernel_coords(p)]


def kernel_invariants(p: Isogeny) -> list[int]:
    """Cyclic factors ``s_i > 1`` with ``ker p = (+) Z/s_i``."""
    s, _, _ = smith_normal_form(p.lattice_matrix)
    return [x for x in s if x > 1]


def lcm(*values: int) -> int:
    out = 1
    for v in values:
        out = out * v // gcd(out, v)
    return out
