from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from torusgg.errors import EffectivityUndecidable, HypothesisNotMet, LatticeMismatch, ZeroVector
from torusgg.mukai import (
    ASSUMED,
    FAIL,
    GG,
    GG_CODIM_ONE,
    NOT_COVERED,
    PASS,
    EffectiveCone,
    MukaiVector,
    NSLattice,
    RRPolynomial,
    albanese_fiber,
    is_positive,
    is_primitive,
    moduli_dim,
    pair,
    rr_eval,
    rr_monotone,
    theorem_b_gate,
)


def hilb(n):
    return MukaiVector(1, (0,), -n)


@pytest.mark.parametrize("n", range(1, 11))
def test_hilbert_vector_arithmetic(n):
    assert pair(hilb(n), hilb(n)) == 2 * n
    assert moduli_dim(hilb(n)) == 2 * n + 2


def test_pairing_by_hand():
    # <v, w> = c1.c1' - r ch2' - r' ch2 with H^2 = 2
    assert pair(MukaiVector(2, (1,), 0), MukaiVector(1, (0,), -1)) == 2
    assert pair(MukaiVector(0, (1,), 1), MukaiVector(0, (1,), 1)) == 2
    lat = NSLattice(((2, 1), (1, 4)))
    v = MukaiVector(1, (1, -1), 3, lat)
    assert pair(v, v) == (2 - 2 + 4) - 6


vectors = st.builds(lambda r, c, s: MukaiVector(r, (c,), s), st.integers(-20, 20), st.integers(-20, 20), st.integers(-20, 20))


@given(vectors, vectors)
def test_pairing_symmetric(v, w):
    assert pair(v, w) == pair(w, v)


@given(vectors, vectors, vectors)
def test_pairing_bilinear(u, v, w):
    s = MukaiVector(u.r + v.r, (u.c1[0] + v.c1[0],), u.ch2 + v.ch2)
    assert pair(s, w) == pair(u, w) + pair(v, w)


def test_lattice_mismatch():
    with pytest.raises(LatticeMismatch):
        pair(hilb(1), MukaiVector(1, (0, 0), 0, NSLattice(((2, 0), (0, 2)))))
    with pytest.raises(LatticeMismatch):
        MukaiVector(1, (0, 0), 0)


def test_lattice_validation():
    with pytest.raises(ValueError):
        NSLattice(((1,),))
    with pytest.raises(ValueError):
        NSLattice(((2, 1), (0, 2)))
    assert NSLattice(((1,),), even=False).rho == 1


def test_primitivity():
    assert is_primitive(hilb(3))
    assert not is_primitive(MukaiVector(2, (0,), -6))
    assert is_primitive(MukaiVector(2, (1,), -6))
    with pytest.raises(ZeroVector):
        is_primitive(MukaiVector(0, (0,), 0))


def test_positivity():
    assert is_positive(hilb(2))
    assert not is_positive(MukaiVector(-1, (0,), 0))
    assert is_positive(MukaiVector(0, (0,), -1))
    assert not is_positive(MukaiVector(0, (0,), 1))
    cone = EffectiveCone(((1,),))
    assert is_positive(MukaiVector(0, (2,), 1), cone)
    assert not is_positive(MukaiVector(0, (-2,), 1), cone)
    with pytest.raises(EffectivityUndecidable):
        is_positive(MukaiVector(0, (2,), 1))
    with pytest.raises(EffectivityUndecidable):
        EffectiveCone(((1, 0), (0, 1))).classify((1, 0))


def test_albanese_fiber():
    f = albanese_fiber(hilb(4))
    assert (f.kummer_index, f.fiber_dim) == (3, 6)
    with pytest.raises(HypothesisNotMet):
        albanese_fiber(hilb(2))
    with pytest.raises(HypothesisNotMet):
        albanese_fiber(MukaiVector(1, (1,), 0, NSLattice(((7,),), even=False)))


@pytest.mark.parametrize("m", [2, 3, 5])
def test_gate_hilbert_two(m):
    res = theorem_b_gate(hilb(2), m, fixed_determinant=True)
    assert res.verdict == GG
    assert res.exponent == 2 * m
    statuses = dict((h, s) for h, s, _ in res.checklist)
    assert ASSUMED in statuses.values()
    assert FAIL not in statuses.values()


def test_gate_hilbert_two_needs_fixed_determinant_and_m():
    assert theorem_b_gate(hilb(2), 1, fixed_determinant=True).verdict == NOT_COVERED
    assert theorem_b_gate(hilb(2), 2).verdict == NOT_COVERED


@pytest.mark.parametrize("n", range(3, 11))
@pytest.mark.parametrize("fixed", [False, True])
def test_gate_codim_one(n, fixed):
    res = theorem_b_gate(hilb(n), 2, fixed_determinant=fixed)
    assert res.verdict == GG_CODIM_ONE
    hyps = [h for h, _, _ in res.checklist]
    if not fixed:
        assert ("H sufficiently general", ASSUMED) in [(h, s) for h, s, _ in res.checklist]
    assert "<v, v> >= 6" in hyps


@pytest.mark.parametrize(
    "v, m",
    [
        (hilb(1), 2),
        (hilb(3), 1),
        (MukaiVector(2, (0,), -6), 2),  # <v,v> = 24 but imprimitive
        (MukaiVector(2, (2,), 0), 3),  # imprimitive
        (MukaiVector(1, (1,), -1), 2),  # <v,v> = 4
        (MukaiVector(-1, (0,), 4), 2),  # not positive
    ],
)
def test_gate_not_covered(v, m):
    res = theorem_b_gate(v, m)
    assert res.verdict == NOT_COVERED
    assert FAIL in [s for _, s, _ in res.checklist]


@given(st.integers(-10, 10), st.integers(-10, 10), st.integers(-10, 10), st.integers(1, 4))
def test_gate_never_covers_small_or_imprimitive(r, c, s, m):
    v = MukaiVector(r, (c,), s)
    if not any(v.entries()):
        return
    res = theorem_b_gate(v, m, cone=EffectiveCone(((1,),)))
    if pair(v, v) < 6 and res.clause != "hilbert_n2":
        assert res.verdict == NOT_COVERED
    if not is_primitive(v):
        assert res.verdict == NOT_COVERED


def test_gate_checklist_serializes():
    d = theorem_b_gate(hilb(2), 2, fixed_determinant=True).to_dict()
    assert d["verdict"] == GG
    assert d["tensor_exponent"] == 4
    assert all(item["status"] in (PASS, FAIL, ASSUMED) for item in d["checklist"])


def test_gate_hilbert_index_check():
    with pytest.raises(ValueError):
        theorem_b_gate(hilb(3), 2, hilbert_case_n=2)


def test_parse():
    v = MukaiVector.parse("1;0;-2")
    assert v.entries() == (1, 0, -2)
    w = MukaiVector.parse("2;1,-1;3", NSLattice(((2, 1), (1, 2))))
    assert w.c1 == (1, -1)
    with pytest.raises(ValueError):
        MukaiVector.parse("1;0")


def test_rr_polynomial():
    P = RRPolynomial(2, (1, 0, Fraction(1, 2)))
    assert rr_eval(P, 4) == 9
    assert rr_monotone(P, range(0, 6), "increasing")
    Q = RRPolynomial(2, (0, -1, 0))
    assert rr_monotone(Q, [3, 1, 2], "decreasing")
    assert not rr_monotone(Q, [1, 2], "increasing")
    with pytest.raises(ValueError):
        rr_monotone(P, [1], "sideways")
    with pytest.raises(ValueError):
        RRPolynomial(1, (1, 2, 3))
