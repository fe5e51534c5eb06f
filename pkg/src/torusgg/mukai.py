"""Mukai-lattice arithmetic on abelian surfaces and applicability gates for moduli of sheaves.

A Mukai vector is ``v = (r, c1, ch2)`` with ``c1`` in the Neron-Severi lattice;
on an abelian surface it equals the Chern character. The pairing is
``<v, w> = c1.c1' - r ch2' - r' ch2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

from .errors import EffectivityUndecidable, HypothesisNotMet, LatticeMismatch, ZeroVector

PASS = "PASS"
FAIL = "FAIL"
ASSUMED = "ASSUMED"

GG = "GG"
GG_CODIM_ONE = "GG_CODIM_ONE"
NOT_COVERED = "NOT_COVERED"


@dataclass(frozen=True)
class NSLattice:
    gram: tuple[tuple[int, ...], ...]
    even: bool = True

    def __post_init__(self):
        gram = tuple(tuple(int(x) for x in row) for row in self.gram)
        n = len(gram)
        if any(len(row) != n for row in gram):
            raise ValueError("Gram matrix must be square")
        if any(gram[i][j] != gram[j][i] for i in range(n) for j in range(n)):
            raise ValueError("Gram matrix must be symmetric")
        if self.even and any(gram[i][i] % 2 for i in range(n)):
            raise ValueError("Neron-Severi lattice of an abelian surface is even")
        object.__setattr__(self, "gram", gram)

    @property
    def rho(self) -> int:
        return len(self.gram)

    def dot(self, a, b) -> int:
        return sum(a[i] * self.gram[i][j] * b[j] for i in range(self.rho) for j in range(self.rho))

    @classmethod
    def principal(cls) -> "NSLattice":
        """Picard rank one with ``H^2 = 2``."""
        return cls(((2,),))


@dataclass(frozen=True)
class MukaiVector:
    r: int
    c1: tuple[int, ...]
    ch2: int
    lattice: NSLattice = field(default_factory=NSLattice.principal)

    def __post_init__(self):
        c1 = tuple(int(x) for x in self.c1)
        if len(c1) != self.lattice.rho:
            raise LatticeMismatch(f"c1 has {len(c1)} coordinates, lattice rank is {self.lattice.rho}")
        object.__setattr__(self, "c1", c1)
        object.__setattr__(self, "r", int(self.r))
        object.__setattr__(self, "ch2", int(self.ch2))

    @classmethod
    def parse(cls, text: str, lattice: NSLattice | None = None) -> "MukaiVector":
        """Parse ``"r;c1;ch2"`` with ``c1`` comma separated, e.g. ``"1;0;-2"``."""
        lattice = lattice or NSLattice.principal()
        parts = [p.strip() for p in text.split(";")]
        if len(parts) != 3:
            raise ValueError(f"expected 'r;c1;ch2', got {text!r}")
        c1 = tuple(int(x) for x in parts[1].split(",")) if parts[1] else ()
        return cls(int(parts[0]), c1, int(parts[2]), lattice)

    def entries(self) -> tuple[int, ...]:
        return (self.r, *self.c1, self.ch2)

    def to_dict(self) -> dict:
        return {"r": self.r, "c1": list(self.c1), "ch2": self.ch2}


def pair(v: MukaiVector, w: MukaiVector) -> int:
    if v.lattice.gram != w.lattice.gram:
        raise LatticeMismatch("Mukai vectors live on different Neron-Severi lattices")
    return v.lattice.dot(v.c1, w.c1) - v.r * w.ch2 - w.r * v.ch2


def is_primitive(v: MukaiVector) -> bool:
    entries = v.entries()
    if not any(entries):
        raise ZeroVector("the zero vector has no primitivity")
    out = 0
    for x in entries:
        out = gcd(out, x)
    return out == 1


@dataclass(frozen=True)
class EffectiveCone:
    """Cone ``{c : a.c >= 0 for every a in inequalities}`` of effective classes.

    Classes strictly inside are effective, classes violating an inequality
    are not; boundary classes cannot be classified from this description.
    """

    inequalities: tuple[tuple[int, ...], ...]

    def classify(self, c1) -> bool:
        values = [sum(a * c for a, c in zip(row, c1)) for row in self.inequalities]
        if any(x < 0 for x in values):
            return False
        if all(x > 0 for x in values):
            return True
        raise EffectivityUndecidable(f"class {tuple(c1)} lies on the boundary of the cone")


def is_positive(v: MukaiVector, cone: EffectiveCone | None = None) -> bool:
    """``r > 0``; or ``r = 0``, ``c1`` effective, ``ch2 != 0``; or ``r = c1 = 0`` and ``ch2 < 0``."""
    if v.r > 0:
        return True
    if v.r < 0:
        return False
    if not any(v.c1):
        return v.ch2 < 0
    if v.ch2 == 0:
        return False
    if cone is None:
        raise EffectivityUndecidable("effectivity of c1 needs a cone description")
    return cone.classify(v.c1)


def moduli_dim(v: MukaiVector) -> int:
    return pair(v, v) + 2


@dataclass(frozen=True)
class AlbaneseFiber:
    kummer_index: int
    fiber_dim: int


def albanese_fiber(v: MukaiVector) -> AlbaneseFiber:
    q = pair(v, v)
    if q < 6:
        raise HypothesisNotMet(f"<v, v> = {q} < 6")
    if q % 2:
        raise HypothesisNotMet(f"<v, v> = {q} is odd")
    n = q // 2 - 1
    return AlbaneseFiber(n, 2 * n)


@dataclass(frozen=True)
class GateResult:
    verdict: str
    exponent: int
    clause: str
    checklist: tuple[tuple[str, str, str], ...]

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "tensor_exponent": self.exponent,
            "clause": self.clause,
            "checklist": [{"hypothesis": h, "status": s, "detail": d} for h, s, d in self.checklist],
        }


def _hilbert_index(v: MukaiVector) -> int | None:
    if v.r == 1 and not any(v.c1) and v.ch2 < 0:
        return -v.ch2
    return None


def theorem_b_gate(v: MukaiVector, m: int, fixed_determinant: bool = False, hilbert_case_n: int | None = None, cone: EffectiveCone | None = None) -> GateResult:
    """Which global-generation statement for ``L^{2m}`` on the moduli space applies to ``v``.

    ``GG`` is the Hilbert-scheme case ``v = (1, 0, -2)`` with fixed
    determinant; ``GG_CODIM_ONE`` needs ``<v, v> >= 6``, primitivity,
    positivity and ``m >= 2``. Generality of the polarization cannot be
    checked and is recorded as assumed.
    """
    n = _hilbert_index(v)
    if hilbert_case_n is not None and n != hilbert_case_n:
        raise ValueError(f"v = {v.entries()} is not the Hilbert-scheme vector (1, 0, -{hilbert_case_n})")
    q = pair(v, v)
    primitive = is_primitive(v)
    checks = [
        ("m >= 2", PASS if m >= 2 else FAIL, f"m = {m}"),
        ("v primitive", PASS if primitive else FAIL, f"entries {v.entries()}"),
    ]
    try:
        positive = is_positive(v, cone)
        checks.append(("v positive", PASS if positive else FAIL, ""))
    except EffectivityUndecidable as exc:
        positive = True
        checks.append(("v positive", ASSUMED, str(exc)))
    exponent = 2 * m
    hilbert = n is not None and fixed_determinant
    if hilbert and n == 2:
        checks.append(("Hilbert scheme S^[2] with fixed determinant", PASS, "v = (1, 0, -2)"))
        checks.append(("polarization", PASS, "any polarization"))
        checks.append(("Albanese fiber is the Kummer K3 surface Kum^1(S)", ASSUMED, "imported structure theorem"))
        checks.append(("Fujita number of the K3 fiber at most 2", ASSUMED, "catalog entry k3_surface, not recomputed"))
        verdict = GG if m >= 2 else NOT_COVERED
        return GateResult(verdict, exponent, "hilbert_n2", tuple(checks))
    checks.append(("<v, v> >= 6", PASS if q >= 6 else FAIL, f"<v, v> = {q}"))
    if hilbert:
        checks.append(("polarization", PASS, f"any polarization (Hilbert scheme S^[{n}])"))
        clause = "hilbert_n_ge_3"
    else:
        checks.append(("H sufficiently general", ASSUMED, "not verifiable from lattice data"))
        clause = "general"
    checks.append(("Albanese fibers deformation-equivalent to a generalized Kummer variety", ASSUMED, "imported structure theorem"))
    ok = m >= 2 and primitive and positive and q >= 6
    return GateResult(GG_CODIM_ONE if ok else NOT_COVERED, exponent, clause, tuple(checks))


@dataclass(frozen=True)
class RRPolynomial:
    """``RR(x) = sum b_i x^i`` with ``b_i`` supplied as data."""

    n: int
    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        coeffs = tuple(Fraction(c) for c in self.coeffs)
        if len(coeffs) > self.n + 1:
            raise ValueError("degree exceeds the dimension")
        object.__setattr__(self, "coeffs", coeffs)


def rr_eval(P: RRPolynomial, x) -> Fraction:
    x = Fraction(x)
    return sum((b * x**i for i, b in enumerate(P.coeffs)), Fraction(0))


def rr_monotone(P: RRPolynomial, values, direction: str) -> bool:
    """Strict monotonicity of ``RR`` on the sorted naturals in ``values``."""
    if direction not in ("increasing", "decreasing"):
        raise ValueError("direction must be 'increasing' or 'decreasing'")
    pts = sorted(set(int(x) for x in values))
    ys = [rr_eval(P, x) for x in pts]
    pairs = list(zip(ys, ys[1:]))
    if direction == "increasing":
        return all(b > a for a, b in pairs)
    return all(b < a for a, b in pairs)
