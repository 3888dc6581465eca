"""Positivity probes for even-order symmetric tensors.

``psd_sample_check`` looks for a vector with ``A x^m < 0``: first over a
small integer lattice (evaluated exactly for exact tensors), then over
uniform samples of the unit sphere.  ``extreme_form_on_sphere`` runs a
multi-restart projected gradient method for the extremes of ``A x^m``
on ``{x : sum |x_i|^m = 1}``; for even ``m`` these extremes are the
smallest and largest H-eigenvalues.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass
from typing import Any

import numpy as np

from .errors import UsageError
from .tensor import Tensor, as_tensor, eval_form

DEFAULT_RESTARTS = 64
DEFAULT_ITERATIONS = 500
DEFAULT_STEP = 0.1
VIOLATION_TOLERANCE = 1e-12
LATTICE_RANGE = 2
LATTICE_MAX_NONZEROS = 3


def _even_order(T: Tensor) -> Tensor:
    T = as_tensor(T)
    if not T.is_cubical:
        raise UsageError(f"expected a cubical tensor, got shape {T.shape}")
    if T.order % 2:
        raise UsageError(f"order {T.order} is odd; the form changes sign with x so positivity is meaningless")
    return T


def batch_forms(A: np.ndarray, X: np.ndarray) -> np.ndarray:
    """``A x^m`` for every row ``x`` of ``X`` (float64)."""
    R = np.tensordot(X, A, axes=([1], [0]))
    for _ in range(A.ndim - 1):
        R = np.einsum("bi...,bi->b...", R, X)
    return R


def lattice_vectors(n: int, bound: int = LATTICE_RANGE, max_nonzeros: int = LATTICE_MAX_NONZEROS) -> np.ndarray:
    """Primitive integer vectors with entries in ``-bound..bound`` and at most
    ``max_nonzeros`` nonzeros, first nonzero entry positive (``x`` and ``-x``
    give the same even-order form value)."""
    values = [v for v in range(-bound, bound + 1) if v]
    rows = []
    for k in range(1, min(max_nonzeros, n) + 1):
        for support in itertools.combinations(range(n), k):
            for vals in itertools.product(values, repeat=k):
                if vals[0] < 0 or math.gcd(*vals) != 1:
                    continue
                x = [0] * n
                for i, v in zip(support, vals):
                    x[i] = v
                rows.append(x)
    return np.array(rows, dtype=np.int64).reshape(-1, n)


@dataclass
class PositivityReport:
    verdict: str
    witness: tuple | None
    witness_value: Any
    trials: int
    seed: int
    lattice_size: int
    source: str | None = None

    def to_json(self) -> dict:
        out = asdict(self)
        if self.witness is not None:
            out["witness"] = [_json_scalar(x) for x in self.witness]
        out["witness_value"] = _json_scalar(self.witness_value)
        return out


def _json_scalar(x):
    if x is None:
        return None
    if isinstance(x, (float, np.floating)):
        return float(x)
    return str(x)


def psd_sample_check(T: Tensor, trials: int = 1000, seed: int = 0) -> PositivityReport:
    """Search for ``x`` with ``A x^m < -tol * max|a|``.

    The integer lattice is scanned completely and the deepest lattice
    witness is reported (recomputed exactly for exact tensors); only if
    the lattice is clean are ``trials`` random unit vectors drawn, and the
    first violating sample is returned.
    """
    T = _even_order(T)
    if trials < 0:
        raise UsageError("trials must be nonnegative")
    n = T.dim
    A = T.astype("float64").data
    threshold = -VIOLATION_TOLERANCE * T.max_abs()

    lattice = lattice_vectors(n)
    if len(lattice):
        values = batch_forms(A, lattice.astype(np.float64))
        best = int(np.argmin(values))
        if values[best] < threshold:
            x = tuple(int(v) for v in lattice[best])
            exact = eval_form(T, list(x)).value if T.kind != "float64" else float(values[best])
            return PositivityReport("witness_found", x, exact, trials, seed, len(lattice), "lattice")

    rng = np.random.default_rng(seed)
    if trials:
        X = rng.standard_normal((trials, n))
        X /= np.linalg.norm(X, axis=1)[:, None]
        values = batch_forms(A, X)
        hits = np.flatnonzero(values < threshold)
        if hits.size:
            i = int(hits[0])
            return PositivityReport(
                "witness_found", tuple(float(v) for v in X[i]), float(values[i]),
                trials, seed, len(lattice), "sphere_sample",
            )
    return PositivityReport("no_violation_found", None, None, trials, seed, len(lattice))


@dataclass
class ExtremeFormResult:
    mode: str
    value: float
    vector: tuple
    restarts: int
    iterations: int
    seed: int
    step: float

    def to_json(self) -> dict:
        out = asdict(self)
        out["vector"] = list(self.vector)
        return out


def _mnorm_normalize(X: np.ndarray, m: int) -> np.ndarray:
    return X / (np.sum(np.abs(X) ** m, axis=-1, keepdims=True) ** (1.0 / m))


def _batch_form_and_vector(A: np.ndarray, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Rows of ``A x^{m-1}`` (trailing modes contracted) and ``A x^m`` for every row x of X."""
    R = np.tensordot(X, A, axes=([1], [A.ndim - 1]))
    for _ in range(A.ndim - 2):
        R = np.einsum("b...i,bi->b...", R, X)
    return np.einsum("bi,bi->b", R, X), R


def extreme_form_on_sphere(
    T: Tensor,
    mode: str = "min",
    restarts: int = DEFAULT_RESTARTS,
    iterations: int = DEFAULT_ITERATIONS,
    seed: int = 0,
    step: float = DEFAULT_STEP,
) -> ExtremeFormResult:
    """Extreme value of ``A x^m`` subject to ``sum |x_i|^m = 1``.

    Each restart starts from a Gaussian draw, moves along the gradient
    ``m * A x^{m-1}`` projected onto the tangent space of the constraint
    (unit length, scaled by its own step), renormalizes, and halves its
    step whenever the move does not improve the value.  Restarts advance
    together as one batch; the best one wins, ties keep the earliest.
    """
    T = _even_order(T)
    if mode not in ("min", "max"):
        raise UsageError(f"mode must be 'min' or 'max', got {mode!r}")
    if restarts < 1 or iterations < 0:
        raise UsageError("need at least one restart and a nonnegative iteration count")
    A = T.astype("float64").data
    m = T.order
    sign = -1.0 if mode == "min" else 1.0
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((restarts, T.dim))
    if not np.all(np.any(X, axis=1)):
        raise UsageError("a restart drew the zero vector")
    X = _mnorm_normalize(X, m)
    values, vecs = _batch_form_and_vector(A, X)
    steps = np.full(restarts, float(step))
    active = np.ones(restarts, dtype=bool)

    for _ in range(iterations):
        if not active.any():
            break
        direction = sign * m * vecs
        normal = np.sign(X) * np.abs(X) ** (m - 1)
        direction -= (np.einsum("bi,bi->b", direction, normal) / np.einsum("bi,bi->b", normal, normal))[:, None] * normal
        length = np.linalg.norm(direction, axis=1)
        active &= (length > 0.0) & (steps >= 1e-15)
        if not active.any():
            break
        idx = np.flatnonzero(active)
        Y = _mnorm_normalize(X[idx] + (steps[idx] / length[idx])[:, None] * direction[idx], m)
        y_values, y_vecs = _batch_form_and_vector(A, Y)
        better = sign * y_values > sign * values[idx]
        win, lose = idx[better], idx[~better]
        X[win], values[win], vecs[win] = Y[better], y_values[better], y_vecs[better]
        steps[lose] *= 0.5

    best = int(np.argmax(sign * values))
    x = X[best]
    value = eval_form(Tensor._wrap(A, "float64"), x).value
    return ExtremeFormResult(mode, value, tuple(float(v) for v in x), restarts, iterations, seed, step)
