"""Tensor determinants: closed forms for GCD tensors and exact oracles.

The determinant of an order-m, dimension-n tensor is the resultant of the
n forms ``F_k(x) = sum a[k, i2..im] x_i2 ... x_im``.  Oracles exist for
``m = 2`` (matrix determinant, Bareiss) and ``n = 2`` (Sylvester
resultant of two binary forms, ``F_1`` rows first); larger regimes are
refused rather than approximated.
"""

from __future__ import annotations

import itertools
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from . import numtheory as nt
from .errors import ClosureError, UnsupportedError, UsageError
from .gcdtensor import _check_order, build_gcd_tensor
from .linalg import bareiss_det
from .tensor import Tensor, as_tensor

# closed forms above this many bits are kept factored
EXPAND_BIT_LIMIT = 1 << 20


@dataclass(frozen=True)
class DetReport:
    method: str
    value: Any
    exponent: int
    bases: tuple = ()
    expanded: bool = True

    def to_json(self) -> dict:
        out = {
            "method": self.method,
            "bases": [_exact_str(b) for b in self.bases],
            "exponent": str(self.exponent),
            "expanded": self.expanded,
        }
        if self.expanded:
            out["value"] = _exact_str(self.value)
        return out

    def same_value(self, other: "DetReport") -> bool:
        """Exact comparison, expanding factored forms only when unavoidable."""
        if self.expanded and other.expanded:
            return self.value == other.value
        if self.bases and other.bases and self.exponent == other.exponent:
            return _product(self.bases) == _product(other.bases)
        return _expand(self) == _expand(other)


def _exact_str(x) -> str:
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return str(x)


def _product(values):
    out = 1
    for v in values:
        out *= v
    return out


def _expand(report: DetReport):
    if report.expanded:
        return report.value
    return _product(report.bases) ** report.exponent


def det_exponent(m: int, n: int) -> int:
    return (m - 1) ** (n - 1)


def _power_report(method: str, bases: Sequence, exponent: int) -> DetReport:
    bases = tuple(bases)
    prod = _product(bases)
    bits = abs(prod).bit_length() if isinstance(prod, int) else (
        abs(prod.numerator).bit_length() + prod.denominator.bit_length())
    if bits * exponent <= EXPAND_BIT_LIMIT:
        return DetReport(method, prod**exponent, exponent, bases, True)
    return DetReport(method, None, exponent, bases, False)


# ---------------------------------------------------------------------------
# oracles


def det_matrix_exact(M):
    """Exact determinant of a square int/rational matrix (Bareiss)."""
    if isinstance(M, Tensor) and M.kind == "float64":
        M = Tensor(np.vectorize(Fraction, otypes=[object])(M.data), "rational")
    return bareiss_det(M)


@dataclass(frozen=True)
class PolynomialSystem:
    """``forms[k]`` maps exponent tuples (total degree ``degree``) to coefficients."""

    n: int
    degree: int
    forms: tuple = field(default_factory=tuple)

    def evaluate(self, x: Sequence) -> list:
        out = []
        for form in self.forms:
            total = 0
            for exps, c in form.items():
                term = c
                for xi, e in zip(x, exps):
                    term *= xi**e
                total += term
            out.append(total)
        return out


def _monomials(n: int, d: int):
    """Exponent tuples of total degree d in n variables, x1-heaviest first."""
    if n == 1:
        yield (d,)
        return
    for a in range(d, -1, -1):
        for rest in _monomials(n - 1, d - a):
            yield (a,) + rest


def polynomial_system(T: Tensor) -> PolynomialSystem:
    """Collect ``F_k = sum a[k, i2..im] x_i2 ... x_im`` monomial by monomial."""
    T = as_tensor(T)
    n, m = T.dim, T.order
    d = m - 1
    forms = []
    for k in range(n):
        coeffs = {e: 0 for e in _monomials(n, d)}
        for idx in itertools.product(range(n), repeat=d):
            exps = [0] * n
            for i in idx:
                exps[i] += 1
            coeffs[tuple(exps)] += T.data[(k,) + idx]
        forms.append(coeffs)
    return PolynomialSystem(n, d, tuple(forms))


def _binary_coefficients(form) -> list:
    """Coefficients of a binary form in decreasing powers of x1."""
    if isinstance(form, Mapping):
        if not form:
            raise UsageError("empty form")
        degrees = {sum(e) for e in form}
        if any(len(e) != 2 for e in form):
            raise UsageError("sylvester_resultant needs forms in exactly two variables")
        if len(degrees) != 1:
            raise UsageError("form is not homogeneous")
        d = degrees.pop()
        return [form.get((d - i, i), 0) for i in range(d + 1)]
    return list(form)


def sylvester_matrix(F, G) -> list[list]:
    f = _binary_coefficients(F)
    g = _binary_coefficients(G)
    d, e = len(f) - 1, len(g) - 1
    size = d + e
    rows = []
    for i in range(e):
        rows.append([0] * i + f + [0] * (size - d - 1 - i))
    for j in range(d):
        rows.append([0] * j + g + [0] * (size - e - 1 - j))
    return rows


def sylvester_resultant(F, G):
    """Resultant of two binary forms as the Sylvester determinant.

    Forms are coefficient maps ``{(a, b): c}`` for ``c x1^a x2^b`` or
    coefficient sequences in decreasing powers of ``x1``.
    """
    rows = sylvester_matrix(F, G)
    if not rows:
        return 1
    return bareiss_det(rows)


def tensor_det_oracle(T: Tensor) -> DetReport:
    T = as_tensor(T)
    if not T.is_cubical:
        raise UsageError(f"determinant needs a cubical tensor, got shape {T.shape}")
    if T.kind == "float64":
        T = Tensor(np.vectorize(Fraction, otypes=[object])(T.data), "rational")
    m, n = T.order, T.dim
    exponent = det_exponent(m, n)
    if m == 2:
        return DetReport("matrix_bareiss", bareiss_det(T), exponent)
    if n == 1:
        # single form a * x1^(m-1): its resultant is the coefficient itself
        return DetReport("univariate", T.data[(0,) * m], exponent)
    if n == 2:
        system = polynomial_system(T)
        return DetReport("sylvester_resultant", sylvester_resultant(*system.forms), exponent)
    raise UnsupportedError(f"no determinant oracle for order {m} and dimension {n} (needs m = 2 or n <= 2)")


# ---------------------------------------------------------------------------
# closed forms


def _require_factor_closed(S) -> None:
    d = nt.missing_divisor(S)
    if d is not None:
        owner = next(s for s in S if s % d == 0)
        raise ClosureError(f"set not factor-closed: {d} divides {owner} but is missing", missing=d)


def _require_gcd_closed(S) -> None:
    g = nt.missing_gcd(S)
    if g is not None:
        raise ClosureError(f"set not gcd-closed: {g} is a pairwise gcd but is missing", missing=g)


def det_closed_form(S: Iterable[int], m: int, scheme: str = "phi", *, g: Callable | Mapping | None = None) -> DetReport:
    """``prod_i base(s_i) ** ((m-1) ** (n-1))`` for closed ``S``.

    ``phi``: totient bases, ``S`` factor-closed.  ``psi``: generalized
    totient bases, ``S`` gcd-closed.  ``multiplicative``: ``(g * mu)``
    bases for the transform ``g[T[S]]``, ``S`` factor-closed.
    """
    S = nt.as_integer_set(S)
    m = _check_order(m)
    exponent = det_exponent(m, len(S))
    if scheme == "phi":
        _require_factor_closed(S)
        return _power_report("closed_form_phi", [nt.euler_phi(s) for s in S], exponent)
    if scheme == "psi":
        _require_gcd_closed(S)
        psi = nt.generalized_totient(S)
        return _power_report("closed_form_psi", [psi[s] for s in S], exponent)
    if scheme in ("multiplicative", "mult"):
        if g is None:
            raise UsageError("multiplicative scheme needs a function g")
        _require_factor_closed(S)
        bases = [nt.mobius_transform(g, s) for s in S]
        if any(isinstance(b, float) for b in bases):
            raise UsageError("multiplicative closed form needs g with exact (int/rational) values")
        return _power_report("closed_form_multiplicative", bases, exponent)
    raise UsageError(f"unknown closed-form scheme {scheme!r}")


# ---------------------------------------------------------------------------
# lower bound scan


@dataclass
class ScanReport:
    n: int
    order: int
    max_value: int
    total: int = 0
    strict: int = 0
    equality: int = 0
    factor_closed: int = 0
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "order": self.order,
            "max_value": self.max_value,
            "total": self.total,
            "strict": self.strict,
            "equality": self.equality,
            "factor_closed": self.factor_closed,
            "violation_count": len(self.violations),
            "violations": self.violations[:50],
            "ok": self.ok,
        }


def _check_scan_regime(n: int, m: int) -> None:
    if m == 2 and 1 <= n <= 8:
        return
    if n == 2 and 2 <= m <= 6:
        return
    raise UnsupportedError(f"lower-bound scan supports m = 2 with n <= 8 or n = 2 with m <= 6, got m={m}, n={n}")


def scan_one(S: Sequence[int], m: int) -> dict:
    """Compare the oracle determinant of ``T[S]`` with the totient product bound."""
    det = tensor_det_oracle(build_gcd_tensor(S, m)).value
    bound = _product(nt.euler_phi(s) for s in S) ** det_exponent(m, len(S))
    fc = nt.missing_divisor(S) is None
    return {"set": list(S), "det": det, "bound": bound, "factor_closed": fc}


def conjecture_scan(n: int, m: int, max_value: int) -> ScanReport:
    """Check ``det T[S] >= prod phi(s)^((m-1)^(n-1))``, with equality iff factor-closed.

    Enumerates every n-subset of ``1..max_value`` in lexicographic order.
    """
    _check_scan_regime(n, m)
    if max_value < n:
        raise UsageError(f"max_value {max_value} is smaller than the subset size {n}")
    report = ScanReport(n, m, max_value)
    for S in itertools.combinations(range(1, max_value + 1), n):
        row = scan_one(S, m)
        det, bound, fc = row["det"], row["bound"], row["factor_closed"]
        report.total += 1
        report.factor_closed += fc
        problem = None
        if det < bound:
            problem = "below_bound"
        elif det == bound:
            report.equality += 1
            if not fc:
                problem = "equality_without_factor_closure"
        else:
            report.strict += 1
            if fc:
                problem = "factor_closed_without_equality"
        if problem:
            report.violations.append({"set": list(S), "det": str(det), "bound": str(bound), "kind": problem})
    return report
