import itertools
import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gcdtensors.errors import DomainError, UsageError
from gcdtensors.gcdtensor import build_gcd_tensor
from gcdtensors.tensor import (
    Tensor,
    entrywise_map,
    eval_form,
    general_product,
    hadamard,
    hadamard_power,
    identity_tensor,
    k_mode_product,
    make_diagonal,
    multi_mode_product,
    outer_power,
    permutation_matrix,
    permute_congruence,
    symmetry_check,
    transpose,
)


def loop_k_mode(T, B, k):
    """Direct sum over i_k of t[..i_k..] * B[j, i_k]."""
    T, B = np.asarray(T, dtype=object), np.asarray(B, dtype=object)
    shape = list(T.shape)
    shape[k - 1] = B.shape[0]
    out = np.zeros(shape, dtype=object)
    for idx in itertools.product(*(range(s) for s in shape)):
        j = idx[k - 1]
        out[idx] = sum(T[idx[: k - 1] + (i,) + idx[k:]] * B[j, i] for i in range(T.shape[k - 1]))
    return out


def loop_general_product(A, B):
    """The composite defined entry by entry over multi-indices alpha of length k-1."""
    A, B = np.asarray(A, dtype=object), np.asarray(B, dtype=object)
    n, m, k = A.shape[0], A.ndim, B.ndim
    order = (m - 1) * (k - 1) + 1
    out = np.zeros((n,) * order, dtype=object)
    for idx in itertools.product(range(n), repeat=order):
        i, rest = idx[0], idx[1:]
        alphas = [rest[t * (k - 1):(t + 1) * (k - 1)] for t in range(m - 1)]
        total = 0
        for js in itertools.product(range(n), repeat=m - 1):
            term = A[(i,) + js]
            for j, alpha in zip(js, alphas):
                term *= B[(j,) + alpha]
            total += term
        out[idx] = total
    return out


def random_symmetric(rng, n, m, low=-4, high=5):
    base = rng.integers(low, high, size=(n,) * m)
    out = np.zeros_like(base)
    for perm in itertools.permutations(range(m)):
        out = out + base.transpose(perm)
    return Tensor(out.tolist(), "int")


def test_outer_power_examples():
    assert outer_power([1, 2], 2) == Tensor([[1, 2], [2, 4]])
    assert outer_power([1, 1], 3) == Tensor(np.ones((2, 2, 2), dtype=int).tolist())
    assert outer_power([0, 0, 0], 4) == Tensor.zeros((3,) * 4)
    assert symmetry_check(outer_power([3, -1, 2], 3))


def test_make_diagonal_examples():
    assert make_diagonal([1, 1], 3) == identity_tensor(3, 2)
    assert make_diagonal([2, 3], 2) == Tensor([[2, 0], [0, 3]])
    I4 = make_diagonal([1, 1], 4)
    assert sum(I4.entries) == 2 and I4[(1, 1, 1, 1)] == 1


def test_k_mode_examples():
    T = build_gcd_tensor([1, 2, 3], 3)
    assert k_mode_product(T, Tensor(np.eye(3, dtype=int).tolist()), 2) == T
    assert k_mode_product(build_gcd_tensor([1, 2], 2), [[1, 1]], 1) == Tensor([[2, 3]])
    assert k_mode_product(Tensor([[2, 0], [0, 3]]), [[0, 1], [1, 0]], 1) == Tensor([[0, 3], [2, 0]])


def test_k_mode_shape_errors():
    T = build_gcd_tensor([1, 2], 2)
    with pytest.raises(UsageError):
        k_mode_product(T, [[1, 1, 1]], 1)
    with pytest.raises(UsageError):
        k_mode_product(T, [[1, 1]], 3)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(2, 3), st.data())
def test_k_mode_matches_loops(n, J, m, data):
    rng = np.random.default_rng(data.draw(st.integers(0, 10**6)))
    T = rng.integers(-5, 6, size=(n,) * m)
    B = rng.integers(-5, 6, size=(J, n))
    k = data.draw(st.integers(1, m))
    got = k_mode_product(Tensor(T.tolist()), Tensor(B.tolist()), k)
    assert np.array_equal(got.data, loop_k_mode(T, B, k))


def test_multi_mode_examples():
    E = Tensor([[1, 2], [0, 3]])
    assert multi_mode_product(identity_tensor(2, 2), E) == Tensor([[5, 6], [6, 9]])
    inc = Tensor([[1, 1, 0, 1, 0], [1, 1, 1, 0, 1]])
    assert multi_mode_product(make_diagonal([1, 1, 2, 2, 2], 2), inc) == Tensor([[4, 2], [2, 6]])
    assert multi_mode_product(Tensor.zeros((5, 5, 5)), inc) == Tensor.zeros((2, 2, 2))


def test_general_product_examples():
    A, B = Tensor([[1, 2], [3, 4]]), Tensor([[5, 6], [7, 8]])
    assert general_product(A, B) == Tensor([[19, 22], [43, 50]])
    C = Tensor(np.arange(8).reshape(2, 2, 2).tolist())
    assert general_product(C, Tensor([[1, 0], [0, 1]])) == C
    assert general_product(C, Tensor([[1, 2], [3, 4]])).order == 3
    assert general_product(Tensor([[1, 2], [3, 4]]), C).order == 3


def test_general_product_rejects_mismatch():
    with pytest.raises(UsageError):
        general_product(Tensor([[1, 2], [3, 4]]), Tensor(np.eye(3, dtype=int).tolist()))
    with pytest.raises(UsageError):
        general_product(Tensor([[1, 2, 3], [3, 4, 5]]), Tensor([[1, 2], [3, 4]]))


@pytest.mark.parametrize("n, m, k", [(2, 2, 3), (2, 3, 2), (2, 3, 3), (3, 3, 2), (2, 4, 2), (3, 2, 3)])
def test_general_product_matches_definition(n, m, k):
    rng = np.random.default_rng(7 * n + m + 11 * k)
    A = rng.integers(-3, 4, size=(n,) * m)
    B = rng.integers(-3, 4, size=(n,) * k)
    got = general_product(Tensor(A.tolist()), Tensor(B.tolist()))
    assert np.array_equal(got.data, loop_general_product(A, B))


def test_general_product_is_matrix_product():
    rng = np.random.default_rng(1)
    for _ in range(20):
        A = rng.integers(-9, 10, size=(4, 4))
        B = rng.integers(-9, 10, size=(4, 4))
        assert np.array_equal(general_product(Tensor(A.tolist()), Tensor(B.tolist())).data, (A @ B).astype(object))


def test_congruence_through_composites():
    # multi-mode action by Q equals Q . A . Q^T for square Q and symmetric A
    rng = np.random.default_rng(3)
    for n in (1, 2, 3):
        for m in (2, 3, 4):
            A = random_symmetric(rng, n, m)
            Q = Tensor(rng.integers(-3, 4, size=(n, n)).tolist())
            assert multi_mode_product(A, Q) == general_product(general_product(Q, A), transpose(Q))


def test_congruence_with_rationals():
    A = Tensor([[[Fraction(1, 2), 1], [1, 2]], [[1, 2], [2, Fraction(-3, 7)]]], "rational")
    Q = Tensor([[Fraction(2, 3), 1], [0, Fraction(-1, 5)]], "rational")
    assert multi_mode_product(A, Q) == general_product(general_product(Q, A), transpose(Q))


def test_hadamard_examples():
    A = build_gcd_tensor([4, 6], 2)
    ones = Tensor([[1, 1], [1, 1]])
    assert hadamard(A, ones) == A
    assert hadamard(A, A) == Tensor([[16, 4], [4, 36]])
    assert hadamard(A, Tensor.zeros((2, 2))) == Tensor.zeros((2, 2))
    with pytest.raises(UsageError):
        hadamard(A, build_gcd_tensor([1, 2, 3], 2))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_hadamard_algebra(seed):
    rng = np.random.default_rng(seed)
    A, B, C = (Tensor(rng.integers(-9, 10, size=(2, 3, 2)).tolist()) for _ in range(3))
    assert hadamard(A, B) == hadamard(B, A)
    assert hadamard(hadamard(A, B), C) == hadamard(A, hadamard(B, C))
    assert hadamard(A, Tensor(np.ones((2, 3, 2), dtype=int).tolist())) == A


def test_hadamard_mixed_kinds_rejected():
    with pytest.raises(UsageError):
        hadamard(Tensor([[1, 2]]), Tensor([[1.0, 2.0]], "float64"))


def test_entrywise_examples(example_A, example_A2):
    assert entrywise_map(example_A, lambda t: t * t) == example_A2
    assert example_A2[(0, 0, 0, 0)] == 9 and example_A2[(0, 0, 0, 1)] == 4 and example_A2[(0, 0, 1, 1)] == 1
    assert hadamard_power(build_gcd_tensor([2, 3, 4], 3), 0) == Tensor(np.ones((3, 3, 3), dtype=int).tolist())
    half = hadamard_power(Tensor([[4, 4], [4, 4]]), 0.5)
    assert half.kind == "float64" and np.array_equal(half.data, np.full((2, 2), 2.0))
    T = build_gcd_tensor([6, 10, 15], 3)
    assert entrywise_map(T, lambda t: t) == T


def test_entrywise_domain_errors():
    with pytest.raises(DomainError):
        hadamard_power(Tensor([[0, 1], [1, 1]]), -1)
    with pytest.raises(DomainError):
        hadamard_power(Tensor([[-1, 1], [1, 1]]), 0.5)
    with pytest.raises(DomainError):
        entrywise_map(Tensor([[1, 2]]), lambda t: {1: 1}[t])


def test_negative_integer_power_stays_exact():
    out = hadamard_power(Tensor([[2, 4]]), -1)
    assert out.kind == "rational" and out.entries == [Fraction(1, 2), Fraction(1, 4)]


def test_eval_form_examples(example_A2):
    fv = eval_form(Tensor([[4, 2], [2, 6]]), [1, 1])
    assert fv.value == 14 and fv.gradient_vector == (6, 8)
    assert eval_form(identity_tensor(4, 2), [1, 2]).value == 17
    assert eval_form(example_A2, [1, -2]).value == -15


def test_eval_form_quartic_expansion(example_A2):
    # 9x^4 + 16x^3y + 6x^2y^2 + 4xy^3 + y^4
    for x, y in itertools.product(range(-3, 4), repeat=2):
        expected = 9 * x**4 + 16 * x**3 * y + 6 * x**2 * y**2 + 4 * x * y**3 + y**4
        assert eval_form(example_A2, [x, y]).value == expected


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(2, 4), st.integers(0, 10**6))
def test_gradient_matches_finite_differences(n, m, seed):
    rng = np.random.default_rng(seed)
    A = random_symmetric(rng, n, m).astype("float64")
    x = rng.standard_normal(n)
    fv = eval_form(A, x)
    grad = m * np.array(fv.gradient_vector)
    h = 1e-5
    fd = np.array([
        (eval_form(A, x + h * e).value - eval_form(A, x - h * e).value) / (2 * h)
        for e in np.eye(n)
    ])
    scale = max(np.max(np.abs(grad)), 1e-300)
    assert np.max(np.abs(fd - grad)) <= 1e-6 * scale


def test_permute_examples():
    T = build_gcd_tensor([4, 6], 2)
    assert permute_congruence(T, [0, 1]) == T
    assert permute_congruence(T, [1, 0]) == Tensor([[6, 2], [2, 4]]) == build_gcd_tensor([6, 4], 2)
    sigma = [2, 0, 3, 1]
    inverse = [sigma.index(i) for i in range(4)]
    U = build_gcd_tensor([3, 4, 6, 8], 3)
    assert permute_congruence(permute_congruence(U, sigma), inverse) == U


def test_permute_is_mode_product_by_permutation_matrix():
    U = build_gcd_tensor([3, 4, 6, 8], 3)
    sigma = [2, 0, 3, 1]
    assert permute_congruence(U, sigma) == multi_mode_product(U, permutation_matrix(sigma))


@given(st.permutations(range(4)), st.permutations(range(4)))
def test_permute_composition(sigma, tau):
    T = build_gcd_tensor([2, 3, 4, 12], 3)
    # composite read left to right: sigma first, then tau
    composite = [tau[sigma[i]] for i in range(4)]
    assert permute_congruence(T, composite) == permute_congruence(permute_congruence(T, tau), sigma)


def test_invalid_permutation():
    with pytest.raises(UsageError):
        permute_congruence(build_gcd_tensor([1, 2], 2), [0, 0])


def test_symmetry_check_examples(example_A):
    assert symmetry_check(outer_power([1, 2, 3], 4))
    assert not symmetry_check(Tensor([[0, 1], [0, 0]]))
    assert symmetry_check(example_A)
    partial = np.zeros((2, 2, 2), dtype=int)
    partial[0, 0, 1] = partial[0, 1, 0] = 1  # missing (1, 0, 0)
    assert not symmetry_check(Tensor(partial.tolist()))


def test_json_round_trip_all_kinds():
    for T in (
        build_gcd_tensor([4, 6, 9], 3),
        Tensor([[Fraction(1, 3), 2], [2, Fraction(-5, 2)]], "rational"),
        hadamard_power(build_gcd_tensor([2, 3], 2), 0.5),
        Tensor([[1, 2, 3]]),
    ):
        doc = json.loads(json.dumps(T.to_json()))
        back = Tensor.from_json(doc)
        assert back == T and back.kind == T.kind


def test_json_layout():
    doc = build_gcd_tensor([4, 6], 2).to_json()
    assert doc == {"order": 2, "dim": 2, "scalar": "int", "entries": ["4", "2", "2", "6"]}
    assert Tensor([[Fraction(1, 2)]], "rational").to_json()["entries"] == ["1/2"]


def test_size_guard():
    with pytest.raises(UsageError):
        Tensor.zeros((10,) * 8)


def test_float_is_never_silently_exact():
    with pytest.raises(UsageError):
        Tensor([[0.5, 1.0]], "int")
    assert Tensor([[1, 2]]).astype("float64").kind == "float64"
