"""GCD tensors, their completely positive decompositions and factorizations.

For an ordered set ``S`` and a factor-closed ``F`` containing it, the
0/1 matrix ``E[i, k] = [f_k divides s_i]`` gives

    T[S] = sum_k w(f_k) * E_k^{(x) m} = diag_m(w) x_1 E x_2 E ... x_m E

with ``w = phi`` (Euler totient), ``w = Psi_F`` when ``F`` is only
gcd-closed, and ``w = (g * mu)`` for the entrywise transform ``g[T[S]]``.
Columns of ``E`` follow ascending ``F``, so for ascending ``S`` the
columns labelled by ``S`` form a unit lower triangular block.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, NamedTuple

import numpy as np

from . import numtheory as nt
from .errors import UsageError
from .linalg import exact_rank
from .tensor import Tensor, entrywise_map, infer_kind, make_diagonal, multi_mode_product, power_function

SCHEME_ALIASES = {
    "phi": "phi_factor_closed",
    "phi_factor_closed": "phi_factor_closed",
    "psi": "psi_gcd_closed",
    "psi_gcd_closed": "psi_gcd_closed",
    "mult": "multiplicative",
    "multiplicative": "multiplicative",
    "fractional": "fractional",
}


def _check_order(m: int) -> int:
    if isinstance(m, bool) or not isinstance(m, (int, np.integer)) or m < 2:
        raise UsageError(f"order must be an integer >= 2, got {m!r}")
    return int(m)


def build_gcd_tensor(S: Iterable[int], m: int) -> Tensor:
    """``t[i1..im] = gcd(s_i1, ..., s_im)``."""
    S = nt.as_integer_set(S)
    m = _check_order(m)
    base = np.array(S, dtype=np.int64)
    out = base
    for _ in range(m - 1):
        out = np.gcd.outer(out, base)
    return Tensor._wrap(out, "int")


@dataclass(frozen=True)
class IncidenceMatrix:
    """0/1 matrix with ``matrix[i, j] = 1`` iff column label j lies below row label i."""

    rows: tuple
    cols: tuple
    matrix: Tensor

    def column(self, k: int) -> tuple[int, ...]:
        return tuple(self.matrix.data[:, k].tolist())

    @property
    def columns(self) -> list[tuple[int, ...]]:
        return [self.column(k) for k in range(len(self.cols))]

    def to_json(self) -> dict:
        return {
            "rows": [str(r) for r in self.rows],
            "cols": [str(c) for c in self.cols],
            "matrix": self.matrix.data.tolist(),
        }


def incidence_matrix(S: Iterable[int], F: Iterable[int]) -> IncidenceMatrix:
    S = nt.as_integer_set(S)
    F = nt.as_integer_set(F)
    present = set(F)
    missing = [s for s in S if s not in present]
    if missing:
        raise UsageError(f"{missing[0]} is in S but not in F")
    rows = np.array(S, dtype=np.int64)[:, None] % np.array(F, dtype=np.int64)[None, :] == 0
    return IncidenceMatrix(S, F, Tensor._wrap(rows.astype(np.int64), "int"))


@dataclass(frozen=True)
class CpDecomposition:
    """``sum_k weights[k] * vectors[k]^{(x) order}`` with 0/1 vectors."""

    order: int
    dim: int
    weights: tuple
    vectors: tuple
    scheme: str
    labels: tuple = ()
    parameter: Any = None
    warning: str | None = None
    _rank: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        if len(self.weights) != len(self.vectors):
            raise UsageError("weights and vectors must have equal length")
        for v in self.vectors:
            if len(v) != self.dim:
                raise UsageError(f"vector of length {len(v)} in a decomposition of dimension {self.dim}")

    @property
    def positive(self) -> bool:
        return all(w > 0 for w in self.weights)

    @property
    def kind(self) -> str:
        return infer_kind(self.weights) if self.weights else "int"

    def rank_witness(self) -> "RankWitness":
        if not self._rank:
            self._rank.append(strong_cp_rank_witness(self))
        return self._rank[0]

    @property
    def certified(self) -> bool:
        """True when the terms certify strong complete positivity."""
        return self.positive and self.rank_witness().spanning

    def to_json(self) -> dict:
        kind = self.kind
        if kind == "float64":
            weights = [float(w) for w in self.weights]
        else:
            weights = [str(w) for w in self.weights]
        out = {
            "order": self.order,
            "dim": self.dim,
            "scheme": self.scheme,
            "weights": weights,
            "vectors": [list(v) for v in self.vectors],
            "labels": [str(x) for x in self.labels],
            "spanning": self.rank_witness().spanning,
            "positive": self.positive,
        }
        if self.parameter is not None:
            out["parameter"] = str(self.parameter)
        if self.warning:
            out["warning"] = self.warning
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "CpDecomposition":
        raw = obj["weights"]
        if any(isinstance(w, float) for w in raw):
            weights = tuple(float(w) for w in raw)
        else:
            weights = tuple(_parse_exact(w) for w in raw)
        vectors = tuple(tuple(int(x) for x in v) for v in obj["vectors"])
        return cls(
            order=int(obj["order"]),
            dim=int(obj.get("dim", len(vectors[0]) if vectors else 0)),
            weights=weights,
            vectors=vectors,
            scheme=obj.get("scheme", ""),
            labels=tuple(obj.get("labels", ())),
            parameter=obj.get("parameter"),
            warning=obj.get("warning"),
        )


def _parse_exact(w):
    if isinstance(w, int):
        return w
    value = Fraction(w)
    return value.numerator if value.denominator == 1 and "/" not in str(w) else value


class RankWitness(NamedTuple):
    rank: int
    spanning: bool


def _fractional_weight_function(r):
    if r is None:
        raise UsageError("fractional scheme needs an exponent r")
    if isinstance(r, str):
        r = Fraction(r)
    if r < 0:
        raise UsageError(f"fractional exponent must be >= 0, got {r}")
    return power_function(r)


def scp_decompose(S: Iterable[int], m: int, scheme: str = "phi", *, g=None, r=None) -> CpDecomposition:
    """Decompose ``T[S]`` (or its entrywise transform) into weighted outer powers.

    ``scheme`` is one of ``phi`` (totient weights over the factor closure),
    ``psi`` (generalized totient over the gcd closure), ``multiplicative``
    (``(g * mu)`` weights, ``g`` a callable or mapping on the factor closure)
    or ``fractional`` (``g(p) = p ** r``).
    """
    S = nt.as_integer_set(S)
    m = _check_order(m)
    try:
        scheme = SCHEME_ALIASES[scheme]
    except KeyError:
        raise UsageError(f"unknown scheme {scheme!r}") from None

    parameter = None
    if scheme == "phi_factor_closed":
        F = nt.factor_closure(S)
        weights = tuple(nt.euler_phi(f) for f in F)
    elif scheme == "psi_gcd_closed":
        F = nt.gcd_closure(S)
        psi = nt.generalized_totient(F)
        weights = tuple(psi[f] for f in F)
    else:
        F = nt.factor_closure(S)
        if scheme == "fractional":
            func = _fractional_weight_function(r)
            parameter = r
        else:
            if g is None:
                raise UsageError("multiplicative scheme needs a function g")
            func = g
        weights = tuple(nt.mobius_transform(func, f) for f in F)

    E = incidence_matrix(S, F)
    warning = None
    if any(w <= 0 for w in weights):
        bad = [f for f, w in zip(F, weights) if w <= 0]
        warning = f"nonpositive weight at {bad[:5]}; no strong-CP certificate"
    return CpDecomposition(
        order=m,
        dim=len(S),
        weights=weights,
        vectors=tuple(E.columns),
        scheme=scheme,
        labels=F,
        parameter=parameter,
        warning=warning,
    )


def _outer_powers(V: np.ndarray, m: int) -> np.ndarray:
    """Stack of outer powers: out[k, i1..im] = V[k, i1] * ... * V[k, im]."""
    l, n = V.shape
    out = V
    for depth in range(1, m):
        out = out[..., None] * V.reshape((l,) + (1,) * depth + (n,))
    return out


def reconstruct(d: CpDecomposition) -> Tensor:
    """``sum_k weight_k * outer_power(vector_k, order)``."""
    n, m = d.dim, d.order
    kind = d.kind
    if not d.weights:
        return Tensor.zeros((n,) * m, kind)
    V = np.array(d.vectors, dtype=np.int64 if all(x in (0, 1) for v in d.vectors for x in v) else object)
    powers = _outer_powers(V, m)
    if kind == "float64":
        w = np.array(d.weights, dtype=np.float64)
        return Tensor._wrap(np.tensordot(w, powers, axes=1), kind)
    if kind == "int" and V.dtype == np.int64:
        bound = max(abs(x) for x in d.weights) * len(d.weights)
        if bound < 2**62:
            w = np.array(d.weights, dtype=np.int64)
            return Tensor._wrap(np.tensordot(w, powers, axes=1), kind)
    w = np.empty(len(d.weights), dtype=object)
    w[:] = list(d.weights)
    return Tensor._wrap(np.tensordot(w, powers.astype(object), axes=1), kind)


def strong_cp_rank_witness(d: CpDecomposition) -> RankWitness:
    """Exact rank of the vectors that carry a nonzero weight."""
    live = [v for w, v in zip(d.weights, d.vectors) if w != 0]
    rank = exact_rank(live) if live else 0
    return RankWitness(rank, rank == d.dim)


@dataclass(frozen=True)
class GcdFactorization:
    D: Tensor
    E: IncidenceMatrix

    def product(self) -> Tensor:
        return multi_mode_product(self.D, self.E.matrix)


def factorize(S: Iterable[int], m: int, scheme: str = "phi") -> GcdFactorization:
    """``T[S] = D x_1 E ... x_m E`` with ``D`` diagonal over the closure of ``S``."""
    d = scp_decompose(S, m, scheme)
    if d.scheme not in ("phi_factor_closed", "psi_gcd_closed"):
        raise UsageError("factorize supports the phi and psi schemes")
    D = make_diagonal(list(d.weights), d.order)
    E = incidence_matrix(nt.as_integer_set(S), d.labels)
    return GcdFactorization(D, E)


def multiplicative_transform(S: Iterable[int], m: int, g: Callable | Mapping) -> Tensor:
    """Entrywise ``g`` applied to the GCD tensor."""
    T = build_gcd_tensor(S, m)
    if isinstance(g, Mapping):
        mapping = g

        def g(x):
            return mapping[x]

    return entrywise_map(T, g)


def hadamard_power_decomposition(S: Sequence[int], m: int, r) -> CpDecomposition:
    return scp_decompose(S, m, "fractional", r=r)
