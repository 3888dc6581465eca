import itertools
import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gcdtensors import numtheory as nt
from gcdtensors.determinant import det_matrix_exact, tensor_det_oracle
from gcdtensors.errors import ClosureError, LatticeError, UsageError
from gcdtensors.gcdtensor import build_gcd_tensor, reconstruct
from gcdtensors.poset import (
    build_lattice,
    build_meet_tensor,
    chain,
    det_closed_form_meet,
    divisibility_lattice,
    is_meet_closed,
    label_str,
    lattice_from_json,
    meet_closure,
    meet_decompose_factorize,
    meet_many,
    poset_totient,
    subset_lattice,
)
from gcdtensors.tensor import Tensor, multi_mode_product

A, B = frozenset("a"), frozenset("b")
EMPTY, AB = frozenset(), frozenset("ab")
SUBSET_MATRIX = Tensor([[0, 0, 0, 0], [0, 1, 0, 1], [0, 0, 1, 1], [0, 1, 1, 2]])

DIV30 = divisibility_lattice(range(1, 31))


def ident(x):
    return x


def test_build_examples():
    L = divisibility_lattice([1, 2, 3, 4, 6, 12])
    assert L.meet(4, 6) == 2
    C = chain(["a", "b", "c"])
    assert C.meet("a", "c") == "a" and C.below("a", "c")


def test_build_rejects_missing_meet():
    with pytest.raises(LatticeError) as err:
        build_lattice(["x", "y"], [])
    assert set(err.value.pair) == {"x", "y"}
    # two maximal common lower bounds
    with pytest.raises(LatticeError):
        build_lattice(["p", "q", "u", "v"], [("p", "u"), ("p", "v"), ("q", "u"), ("q", "v")])


def test_build_rejects_non_order():
    with pytest.raises(LatticeError) as err:
        build_lattice(["a", "b", "c"], [("a", "b"), ("b", "c"), ("c", "a")])
    assert "partial order" in str(err.value)
    with pytest.raises(UsageError):
        build_lattice(["a"], [("a", "z")])
    with pytest.raises(UsageError):
        build_lattice(["a", "a"], [])


def test_transitive_closure_from_cover_pairs():
    L = build_lattice(list("abcd"), [("a", "b"), ("b", "c"), ("c", "d")])
    assert L.below("a", "d") and not L.below("d", "a")
    assert ("a", "d") in L.order_pairs()


def test_meet_many_examples():
    assert meet_many(divisibility_lattice([1, 2, 3, 4, 6, 12]), [4, 6, 12]) == 2
    assert meet_many(chain(["x", "y"]), ["y"]) == "y"
    assert meet_many(subset_lattice("ab"), [A, B]) == EMPTY
    with pytest.raises(UsageError):
        meet_many(DIV30, [31])
    with pytest.raises(UsageError):
        meet_many(DIV30, [])


@given(st.lists(st.integers(1, 30), min_size=1, max_size=5), st.randoms())
def test_meet_many_order_free_and_matches_gcd(items, rnd):
    shuffled = list(items)
    rnd.shuffle(shuffled)
    assert meet_many(DIV30, items) == meet_many(DIV30, shuffled) == nt.gcd_many(items)


def test_meet_closure_examples():
    assert sorted(meet_closure(DIV30, [4, 6])) == [2, 4, 6]
    C = chain(list("abcde"))
    for r in range(1, 6):
        for S in itertools.combinations("abcde", r):
            assert is_meet_closed(C, S)
    L = subset_lattice("ab")
    assert set(meet_closure(L, [A, B])) == {A, B, EMPTY}
    assert meet_closure(DIV30, [6, 4])[:2] == [6, 4]


@given(st.lists(st.integers(1, 30), min_size=1, max_size=5, unique=True))
def test_meet_closure_is_gcd_closure(S):
    assert sorted(meet_closure(DIV30, S)) == list(nt.gcd_closure(S))
    assert is_meet_closed(DIV30, S) == nt.classify_set(S)["gcd_closed"]


def test_poset_totient_examples():
    assert poset_totient(DIV30, [2, 4, 6], ident) == {2: 2, 4: 2, 6: 4}
    L = subset_lattice("ab")
    assert poset_totient(L, list(L.elements), len) == {EMPTY: 0, A: 1, B: 1, AB: 0}
    assert poset_totient(DIV30, [12], ident) == {12: 12}


def test_poset_totient_extension_independent():
    L = subset_lattice("abc")
    S = list(L.elements)
    g = {s: Fraction(len(s) ** 2 + 1, 3) for s in S}
    ref = poset_totient(L, S, g)
    rng = np.random.default_rng(0)
    for _ in range(10):
        order = [S[i] for i in rng.permutation(len(S))]
        assert poset_totient(L, order, g) == ref
    for s in S:
        assert ref[s] + sum(ref[t] for t in S if t != s and L.below(t, s)) == g[s]


def test_meet_tensor_examples():
    L = subset_lattice("ab")
    assert build_meet_tensor(L, list(L.elements), len, 2) == SUBSET_MATRIX
    assert build_meet_tensor(DIV30, [4, 6, 9], ident, 3) == build_gcd_tensor([4, 6, 9], 3)
    const = build_meet_tensor(L, [A, B, AB], lambda s: Fraction(5, 2), 3)
    assert set(const.entries) == {Fraction(5, 2)} and const.kind == "rational"
    with pytest.raises(UsageError):
        build_meet_tensor(L, [frozenset("z")], len, 2)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(1, 30), min_size=1, max_size=4, unique=True), st.integers(2, 4))
def test_divisibility_bridge(S, m):
    assert build_meet_tensor(DIV30, S, ident, m) == build_gcd_tensor(S, m)
    assert poset_totient(DIV30, S, ident) == nt.generalized_totient(S)


def test_decompose_examples():
    f = meet_decompose_factorize(DIV30, [4, 6], ident, 2, F=[2, 4, 6])
    assert f.decomposition.weights == (2, 2, 4)
    assert reconstruct(f.decomposition) == Tensor([[4, 2], [2, 6]])
    assert multi_mode_product(f.D, f.E.matrix) == Tensor([[4, 2], [2, 6]])
    L = subset_lattice("ab")
    whole = list(L.elements)
    f = meet_decompose_factorize(L, whole, len, 2, F=whole)
    assert reconstruct(f.decomposition) == SUBSET_MATRIX
    f = meet_decompose_factorize(DIV30, [7], ident, 3, F=[7])
    assert f.decomposition.weights == (7,) and f.decomposition.vectors == ((1,),)


def test_decompose_rejects_open_superset():
    with pytest.raises(ClosureError):
        meet_decompose_factorize(DIV30, [4, 6], ident, 2, F=[4, 6])
    with pytest.raises(UsageError):
        meet_decompose_factorize(DIV30, [4, 6], ident, 2, F=[2, 4])


def test_decompose_signed_valuation_is_still_an_identity():
    L = subset_lattice("abc")
    S = [frozenset("ab"), frozenset("bc"), frozenset("c")]
    g = {s: Fraction((-1) ** len(s) * (len(s) + 2), 3) for s in L.elements}
    for m in (2, 3, 4):
        f = meet_decompose_factorize(L, S, g, m)
        T = build_meet_tensor(L, S, g, m)
        assert reconstruct(f.decomposition) == T
        assert f.product() == T
        assert f.decomposition.warning


def test_det_examples():
    assert det_closed_form_meet(DIV30, [2, 4, 6], ident, 2).value == 16
    L = subset_lattice("ab")
    whole = list(L.elements)
    assert det_closed_form_meet(L, whole, len, 2).value == 0
    assert det_matrix_exact(SUBSET_MATRIX) == 0
    C = chain([1, 3, 7])
    r = det_closed_form_meet(C, [1, 3, 7], ident, 2)
    assert r.bases == (1, 2, 4) and r.value == 8 == det_matrix_exact(build_meet_tensor(C, [1, 3, 7], ident, 2))


def test_det_rejects_open_set():
    with pytest.raises(ClosureError):
        det_closed_form_meet(DIV30, [4, 6], ident, 2)


def test_det_pairs_against_sylvester():
    L = subset_lattice("abc")
    g = {s: len(s) + 1 for s in L.elements}
    for S in ([EMPTY, A], [frozenset("a"), AB], [frozenset("b"), frozenset("bc")]):
        for m in range(2, 7):
            assert det_closed_form_meet(L, S, g, m).value == tensor_det_oracle(build_meet_tensor(L, S, g, m)).value


def test_lattice_json_round_trip():
    L = subset_lattice("ab")
    doc = json.loads(json.dumps(L.to_json()))
    doc["g"] = {label_str(e): len(e) for e in L.elements}
    back, g = lattice_from_json(doc)
    assert set(back.elements) == set(L.elements)
    assert g == {e: len(e) for e in L.elements}
    assert build_meet_tensor(back, [EMPTY, A, B, AB], g, 2) == SUBSET_MATRIX


def test_lattice_json_valuation_list_and_errors():
    L, g = lattice_from_json({"elements": [1, 2, 3], "pairs": [[1, 2], [1, 3]], "g": [1, "3/2", 2.5]})
    assert g == {1: 1, 2: Fraction(3, 2), 3: 2.5}
    with pytest.raises(UsageError):
        lattice_from_json({"pairs": []})
    with pytest.raises(UsageError):
        lattice_from_json({"elements": [1, 2], "g": [1]})
