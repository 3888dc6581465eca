"""Exact integer arithmetic functions and set closures.

Everything here works on plain Python ints (and ``Fraction`` where a
function table may carry rational values).  Factorization is trial
division, which is plenty for inputs up to ``MAX_ELEMENT``.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable, Mapping
from fractions import Fraction
from functools import lru_cache, reduce
from itertools import combinations
from typing import Union

from .errors import UsageError

MAX_ELEMENT = 10**9

Scalar = Union[int, Fraction, float]
ArithmeticFunction = Union[Callable[[int], Scalar], Mapping[int, Scalar]]


def as_integer_set(values: Iterable[int]) -> tuple[int, ...]:
    """Validate an ordered set of distinct positive integers and return it as a tuple."""
    out = []
    for v in values:
        if isinstance(v, bool) or not isinstance(v, int):
            try:
                iv = int(v)
            except (TypeError, ValueError):
                raise UsageError(f"not an integer: {v!r}") from None
            if iv != v:
                raise UsageError(f"not an integer: {v!r}")
            v = iv
        if v < 1:
            raise UsageError(f"set elements must be positive, got {v}")
        if v > MAX_ELEMENT:
            raise UsageError(f"set element {v} exceeds the supported bound {MAX_ELEMENT}")
        out.append(v)
    if not out:
        raise UsageError("set must be nonempty")
    if len(set(out)) != len(out):
        dup = next(v for v in out if out.count(v) > 1)
        raise UsageError(f"set elements must be distinct, {dup} repeats")
    return tuple(out)


def gcd_many(values: Iterable[int]) -> int:
    values = list(values)
    if not values:
        raise UsageError("gcd_many needs at least one value")
    if any(v < 1 for v in values):
        raise UsageError("gcd_many expects positive integers")
    return reduce(math.gcd, values)


@lru_cache(maxsize=None)
def factorize(k: int) -> tuple[tuple[int, int], ...]:
    """Prime factorization of ``k`` as ``((p1, e1), (p2, e2), ...)``, ascending primes."""
    if k < 1:
        raise UsageError(f"factorize expects a positive integer, got {k}")
    out = []
    n = k
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if n > 1:
        out.append((n, 1))
    return tuple(out)


@lru_cache(maxsize=None)
def _divisors(k: int) -> tuple[int, ...]:
    divs = [1]
    for p, e in factorize(k):
        divs = [d * p**i for d in divs for i in range(e + 1)]
    return tuple(sorted(divs))


def divisors(k: int) -> tuple[int, ...]:
    """All positive divisors of ``k``, ascending."""
    if k < 1:
        raise UsageError(f"divisors expects a positive integer, got {k}")
    return _divisors(k)


def euler_phi(k: int) -> int:
    if k < 1:
        raise UsageError(f"euler_phi expects a positive integer, got {k}")
    result = k
    for p, _ in factorize(k):
        result -= result // p
    return result


def mobius(k: int) -> int:
    if k < 1:
        raise UsageError(f"mobius expects a positive integer, got {k}")
    fs = factorize(k)
    if any(e > 1 for _, e in fs):
        return 0
    return -1 if len(fs) % 2 else 1


def factor_closure(S: Iterable[int]) -> tuple[int, ...]:
    """Smallest factor-closed superset of ``S`` (every divisor of every member), ascending."""
    S = as_integer_set(S)
    out = set()
    for s in S:
        out.update(divisors(s))
    return tuple(sorted(out))


def gcd_closure(S: Iterable[int]) -> tuple[int, ...]:
    """Smallest gcd-closed superset of ``S``, ascending."""
    S = as_integer_set(S)
    closed = set(S)
    frontier = list(closed)
    while frontier:
        new = set()
        members = list(closed)
        for a in frontier:
            for b in members:
                g = math.gcd(a, b)
                if g not in closed:
                    new.add(g)
        closed |= new
        frontier = list(new)
    return tuple(sorted(closed))


def missing_divisor(S: Iterable[int]) -> int | None:
    """Some divisor of a member of ``S`` that is not in ``S``, or None if factor-closed."""
    members = set(S)
    for s in sorted(members):
        for d in divisors(s):
            if d not in members:
                return d
    return None


def missing_gcd(S: Iterable[int]) -> int | None:
    """Some pairwise gcd of members of ``S`` that is not in ``S``, or None if gcd-closed."""
    members = sorted(set(S))
    present = set(members)
    for i, a in enumerate(members):
        for b in members[i + 1:]:
            g = math.gcd(a, b)
            if g not in present:
                return g
    return None


def classify_set(S: Iterable[int]) -> dict[str, bool]:
    S = as_integer_set(S)
    return {
        "factor_closed": missing_divisor(S) is None,
        "gcd_closed": missing_gcd(S) is None,
    }


def _evaluator(f: ArithmeticFunction) -> Callable[[int], Scalar]:
    """Callable view of ``f`` that raises UsageError where ``f`` is undefined."""
    get = f.__getitem__ if isinstance(f, Mapping) else f

    def lookup(x: int) -> Scalar:
        try:
            value = get(x)
        except (KeyError, IndexError):
            raise UsageError(f"function is not defined at {x}") from None
        if value is None:
            raise UsageError(f"function is not defined at {x}")
        return value

    return lookup


def identity(k: int) -> int:
    return k


def one(k: int) -> int:
    return 1


def dirichlet_convolve(f: ArithmeticFunction, g: ArithmeticFunction, k: int) -> Scalar:
    """``sum_{d | k} f(d) g(k/d)``.

    Exact when ``f`` and ``g`` return ints or Fractions; a float anywhere
    makes the result a float.
    """
    if k < 1:
        raise UsageError(f"dirichlet_convolve expects a positive integer, got {k}")
    f, g = _evaluator(f), _evaluator(g)
    total: Scalar = 0
    for d in divisors(k):
        total += f(d) * g(k // d)
    return total


def mobius_transform(g: ArithmeticFunction, k: int) -> Scalar:
    """``(g * mu)(k)``: the weight that makes ``sum_{d | n} weight(d) == g(n)``.

    Only squarefree ``d`` have ``mu(d) != 0``, so the sum runs over the
    subsets of the prime divisors of ``k``.
    """
    if k < 1:
        raise UsageError(f"mobius_transform expects a positive integer, got {k}")
    primes = [p for p, _ in factorize(k)]
    g = _evaluator(g)
    total: Scalar = 0
    for size in range(len(primes) + 1):
        for chosen in combinations(primes, size):
            d = math.prod(chosen)
            term = g(k // d)
            total += -term if size % 2 else term
    return total


def generalized_totient(S: Iterable[int]) -> dict[int, int]:
    """Generalized totient on ``S``, keyed by element in the order of ``S``.

    Evaluated in ascending numeric order, which respects divisibility, so
    every proper divisor inside ``S`` is known before it is needed.
    """
    S = as_integer_set(S)
    psi: dict[int, int] = {}
    done: list[int] = []
    for s in sorted(S):
        psi[s] = s - sum(psi[t] for t in done if s % t == 0)
        done.append(s)
    return {s: psi[s] for s in S}
