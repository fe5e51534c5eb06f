"""Fujita numbers as bound-valued catalog entries, closed-form families and the fibration ledger."""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from .errors import HypothesisNotMet, UnboundedEntry

EXACT = "exact"
LOWER = "lower"
UPPER = "upper"
INTERVAL = "interval"

CONSISTENT = "CONSISTENT"
VIOLATION = "VIOLATION"
UNDECIDED = "UNDECIDED"


@dataclass(frozen=True)
class FujitaValue:
    kind: str
    a: int
    b: int | None = None

    def __post_init__(self):
        if self.kind not in (EXACT, LOWER, UPPER, INTERVAL):
            raise ValueError(f"unknown bound kind {self.kind!r}")
        if self.a < 1 or (self.b is not None and self.b < 1):
            raise ValueError("Fujita numbers are at least 1")
        if self.kind == INTERVAL and (self.b is None or self.a > self.b):
            raise ValueError("interval bounds must satisfy a <= b")

    @classmethod
    def exact(cls, k: int) -> "FujitaValue":
        return cls(EXACT, k)

    @classmethod
    def lower_bound(cls, k: int) -> "FujitaValue":
        return cls(LOWER, k)

    @classmethod
    def upper_bound(cls, k: int) -> "FujitaValue":
        return cls(UPPER, k)

    @classmethod
    def interval(cls, a: int, b: int) -> "FujitaValue":
        return cls(INTERVAL, a, b)

    def lower(self) -> int:
        """Best lower bound; every Fujita number is at least 1."""
        return self.a if self.kind in (EXACT, LOWER, INTERVAL) else 1

    def upper(self) -> int | None:
        if self.kind == EXACT:
            return self.a
        if self.kind == UPPER:
            return self.a
        if self.kind == INTERVAL:
            return self.b
        return None

    def to_dict(self) -> dict:
        if self.kind == INTERVAL:
            return {"kind": self.kind, "a": self.a, "b": self.b}
        return {"kind": self.kind, "k": self.a}

    def __str__(self) -> str:
        return {
            EXACT: f"Exact({self.a})",
            LOWER: f"LowerBound({self.a})",
            UPPER: f"UpperBound({self.a})",
            INTERVAL: f"Interval({self.a}, {self.b})",
        }[self.kind]


@dataclass(frozen=True)
class FujitaEntry:
    family_id: str
    dim: int | None
    value: FujitaValue
    provenance: str

    @classmethod
    def from_dict(cls, d: dict) -> "FujitaEntry":
        kind = d["kind"]
        value = FujitaValue(kind, d["a"], d["b"]) if kind == INTERVAL else FujitaValue(kind, d["k"])
        return cls(d["family_id"], d.get("dim"), value, d["provenance"])

    def to_dict(self) -> dict:
        return {"family_id": self.family_id, "dim": self.dim, **self.value.to_dict(), "provenance": self.provenance}


@dataclass(frozen=True)
class FibrationEntry:
    total: FujitaEntry
    fiber: FujitaEntry
    base: FujitaEntry
    fibration_id: str = ""

    def to_dict(self) -> dict:
        return {
            "fibration_id": self.fibration_id,
            "total": self.total.to_dict(),
            "fiber": self.fiber.to_dict(),
            "base": self.base.to_dict(),
        }


def hypersurface_fujita(N: int, d: int, very_general: bool = False) -> FujitaEntry:
    """Smooth degree-``d`` hypersurface in ``P^N``: ``max(1, N + 1 - d)``."""
    if not ((N >= 4 and d >= 2) or (N == 3 and d >= 4 and very_general)):
        raise HypothesisNotMet("needs N >= 4 and d >= 2, or N = 3, d >= 4 and a very general member")
    return FujitaEntry(
        f"hypersurface_N{N}_d{d}",
        N - 1,
        FujitaValue.exact(max(1, N + 1 - d)),
        "Picard group generated by O(1) and omega = O(d - N - 1)",
    )


def blowup_lower_bound(n: int) -> FujitaEntry:
    """Blow-up of an ``n``-dimensional abelian variety at a point."""
    if n < 2:
        raise HypothesisNotMet("needs an abelian variety of dimension at least 2")
    return FujitaEntry(
        f"abelian_blowup_n{n}",
        n,
        FujitaValue.lower_bound(n - 1),
        "restriction of K + mL to the exceptional divisor is O(m + 1 - n)",
    )


def load_catalog(path=None) -> dict:
    if path is None:
        text = resources.files("torusgg").joinpath("data/fujita_catalog.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    return json.loads(text)


def standard_entries(path=None) -> list[FujitaEntry]:
    return [FujitaEntry.from_dict(d) for d in load_catalog(path)["entries"]]


def entry(family_id: str, path=None) -> FujitaEntry:
    for e in standard_entries(path):
        if e.family_id == family_id:
            return e
    raise KeyError(family_id)


def standard_fibrations(path=None) -> list[FibrationEntry]:
    data = load_catalog(path)
    by_id = {e["family_id"]: FujitaEntry.from_dict(e) for e in data["entries"]}
    return [
        FibrationEntry(by_id[f["total"]], by_id[f["fiber"]], by_id[f["base"]], f["fibration_id"])
        for f in data.get("fibrations", [])
    ]


@dataclass(frozen=True)
class ExponentRule:
    """The exponent set ``{2m : m >= start}``."""

    start: int

    def __contains__(self, e: int) -> bool:
        return e % 2 == 0 and e // 2 >= self.start

    def first(self, count: int) -> list[int]:
        return [2 * (self.start + i) for i in range(count)]

    def to_dict(self) -> dict:
        return {"exponents": f"2m for m >= {self.start}", "first": self.first(4)}


def theorem_a_bound(f_fiber: FujitaEntry | FujitaValue) -> ExponentRule:
    """Exponents ``2m`` with ``m`` at least the best upper bound on the fiber Fujita number."""
    value = f_fiber.value if isinstance(f_fiber, FujitaEntry) else f_fiber
    k = value.upper()
    if k is None:
        raise UnboundedEntry("the fiber Fujita number has no upper bound")
    return ExponentRule(k)


def conjecture_check(e: FibrationEntry) -> str:
    """Compare ``f_X`` with ``f_pi * f_Y`` using only the available bounds."""
    up_x = e.total.value.upper()
    if up_x is not None and up_x <= e.fiber.value.lower() * e.base.value.lower():
        return CONSISTENT
    up_f, up_b = e.fiber.value.upper(), e.base.value.upper()
    if up_f is not None and up_b is not None and e.total.value.lower() > up_f * up_b:
        return VIOLATION
    return UNDECIDED
