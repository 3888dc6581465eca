"""Shared fixtures and brute-force oracles used across the test modules."""

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from gcdtensors.tensor import Tensor, hadamard_power


def brute_gcd_tensor(S, m):
    """Nested-loop GCD tensor, independent of the library's vectorized build."""
    n = len(S)
    out = np.empty((n,) * m, dtype=object)
    for idx in itertools.product(range(n), repeat=m):
        out[idx] = math.gcd(*(S[i] for i in idx))
    return out


def leibniz_det(M):
    """Determinant by the permutation expansion; only for small matrices."""
    M = [list(r) for r in M]
    n = len(M)
    total = 0
    for perm in itertools.permutations(range(n)):
        inversions = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = -1 if inversions % 2 else 1
        for i, j in enumerate(perm):
            term *= M[i][j]
        total += term
    return total


def brute_phi(k):
    return sum(1 for j in range(1, k + 1) if math.gcd(j, k) == 1)


def brute_mobius(k):
    primes = [p for p in range(2, k + 1) if k % p == 0 and all(p % q for q in range(2, p))]
    if any(k % (p * p) == 0 for p in primes):
        return 0
    return (-1) ** len(primes)


def example_tensor():
    """The fourth-order two-dimensional symmetric tensor used for the H-eigenvalue example."""
    slices = {
        (0, 0): [[3, -2], [-2, 1]],
        (0, 1): [[-2, 1], [1, 1]],
        (1, 0): [[-2, 1], [1, 1]],
        (1, 1): [[1, 1], [1, 1]],
    }
    a = np.zeros((2, 2, 2, 2), dtype=np.int64)
    for (k, l), block in slices.items():
        a[:, :, k, l] = block
    return Tensor(a.tolist(), "int")


@pytest.fixture(scope="session")
def example_A():
    return example_tensor()


@pytest.fixture(scope="session")
def example_A2():
    return hadamard_power(example_tensor(), 2)


def as_fraction_matrix(M):
    return [[Fraction(x) for x in row] for row in M]


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
