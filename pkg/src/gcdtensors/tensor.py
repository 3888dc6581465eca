"""Dense tensors over exact integers, exact rationals or binary64 floats.

A ``Tensor`` wraps a numpy array.  Exact kinds live in ``object`` arrays
holding Python ``int`` / ``Fraction`` values, so nothing ever rounds;
``float64`` tensors use ordinary float arrays.  Operations between tensors
of different kinds are rejected, conversion is explicit via ``astype``.

Entries are laid out lexicographically with the first index most
significant (numpy C order), which is also the flat order used by the JSON
format.  Mode indices in the public API are 1-based, matching the usual
``A x_k B`` notation.
"""

from __future__ import annotations

import math
import string
from collections.abc import Callable, Sequence
from fractions import Fraction
from typing import Any, NamedTuple

import numpy as np

from .errors import DomainError, UsageError

KINDS = ("int", "rational", "float64")
MAX_ENTRIES = 10**7
_INT64_SAFE = 2**62


def _to_int(x) -> int:
    if isinstance(x, Fraction):
        if x.denominator != 1:
            raise UsageError(f"{x} is not an integer")
        return x.numerator
    if isinstance(x, (float, np.floating)):
        raise UsageError("float entries need an explicit conversion to an exact kind")
    return int(x)


def _to_fraction(x) -> Fraction:
    if isinstance(x, (float, np.floating)):
        raise UsageError("float entries need an explicit conversion to an exact kind")
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, Fraction):
        return x
    return Fraction(int(x))


def infer_kind(values) -> str:
    """Scalar kind of an iterable of Python or numpy scalars."""
    kind = "int"
    for v in values:
        if isinstance(v, (float, np.floating)):
            return "float64"
        if isinstance(v, complex):
            raise DomainError(f"complex value {v!r} is not a real scalar")
        if isinstance(v, Fraction):
            kind = "rational"
        elif not isinstance(v, (int, np.integer)):
            raise UsageError(f"unsupported scalar {v!r}")
    return kind


def _convert(arr: np.ndarray, kind: str) -> np.ndarray:
    if kind == "float64":
        return np.asarray(arr, dtype=np.float64)
    conv = _to_int if kind == "int" else _to_fraction
    flat = [conv(x) for x in arr.ravel().tolist()]
    out = np.empty(len(flat), dtype=object)
    out[:] = flat
    return out.reshape(arr.shape)


class Tensor:
    """Immutable dense tensor of arbitrary shape."""

    __slots__ = ("_data", "kind")

    def __init__(self, data: Any, kind: str | None = None):
        if isinstance(data, Tensor):
            arr = data._data
            kind = kind or data.kind
        else:
            arr = np.asarray(data, dtype=object if kind != "float64" else np.float64)
            if arr.dtype == object and arr.size and isinstance(arr.flat[0], (list, tuple)):
                raise UsageError("ragged nested input is not a tensor")
        if arr.ndim == 0:
            raise UsageError("a tensor needs at least one mode")
        if arr.size > MAX_ENTRIES:
            raise UsageError(f"tensor with {arr.size} entries exceeds the {MAX_ENTRIES} entry limit")
        if kind is None:
            kind = infer_kind(arr.ravel().tolist())
        if kind not in KINDS:
            raise UsageError(f"unknown scalar kind {kind!r}")
        if not (isinstance(data, Tensor) and data.kind == kind):
            arr = _convert(arr, kind)
        arr.flags.writeable = False
        self._data = arr
        self.kind = kind

    @classmethod
    def _wrap(cls, arr: np.ndarray, kind: str) -> "Tensor":
        # trusted constructor: arr already holds scalars of the right kind
        if arr.size > MAX_ENTRIES:
            raise UsageError(f"tensor with {arr.size} entries exceeds the {MAX_ENTRIES} entry limit")
        t = object.__new__(cls)
        if kind != "float64" and arr.dtype != object:
            arr = arr.astype(object)
        elif kind == "float64" and arr.dtype != np.float64:
            arr = arr.astype(np.float64)
        arr.flags.writeable = False
        t._data = arr
        t.kind = kind
        return t

    @classmethod
    def zeros(cls, shape: Sequence[int], kind: str = "int") -> "Tensor":
        if kind == "float64":
            return cls._wrap(np.zeros(tuple(shape)), kind)
        zero = 0 if kind == "int" else Fraction(0)
        arr = np.empty(tuple(shape), dtype=object)
        arr.fill(zero)
        return cls._wrap(arr, kind)

    @classmethod
    def from_flat(cls, shape: Sequence[int], entries: Sequence, kind: str | None = None) -> "Tensor":
        shape = tuple(int(s) for s in shape)
        if len(entries) != math.prod(shape):
            raise UsageError(f"{len(entries)} entries do not fill shape {shape}")
        arr = np.empty(len(entries), dtype=object)
        arr[:] = list(entries)
        return cls(arr.reshape(shape), kind)

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def shape(self) -> tuple[int, ...]:
        return self._data.shape

    @property
    def order(self) -> int:
        return self._data.ndim

    @property
    def is_cubical(self) -> bool:
        return len(set(self.shape)) == 1

    @property
    def dim(self) -> int:
        if not self.is_cubical:
            raise UsageError(f"tensor of shape {self.shape} has no single dimension")
        return self.shape[0]

    @property
    def entries(self) -> list:
        return self._data.ravel().tolist()

    def __getitem__(self, index):
        return self._data[index]

    def astype(self, kind: str) -> "Tensor":
        if kind == self.kind:
            return self
        if kind == "float64":
            return Tensor._wrap(np.array([float(x) for x in self.entries]).reshape(self.shape), kind)
        return Tensor(self._data, kind)

    def __eq__(self, other):
        if not isinstance(other, Tensor):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.shape == other.shape
            and bool(np.array_equal(self._data, other._data))
        )

    __hash__ = None

    def __add__(self, other: "Tensor") -> "Tensor":
        kind = _same_kind(self, other)
        _same_shape(self, other)
        return Tensor._wrap(self._data + other._data, kind)

    def __sub__(self, other: "Tensor") -> "Tensor":
        kind = _same_kind(self, other)
        _same_shape(self, other)
        return Tensor._wrap(self._data - other._data, kind)

    def scale(self, c) -> "Tensor":
        """Multiply every entry by the scalar ``c`` (which must suit the kind)."""
        if self.kind == "float64":
            return Tensor._wrap(self._data * float(c), "float64")
        if isinstance(c, (float, np.floating)):
            raise UsageError("scaling an exact tensor by a float; convert it first")
        kind = self.kind
        if isinstance(c, Fraction) and kind == "int":
            kind = "rational"
            return Tensor(self._data * c, kind)
        return Tensor._wrap(self._data * c, kind)

    def max_abs(self) -> float:
        if self._data.size == 0:
            return 0.0
        return float(max(abs(x) for x in self.entries))

    def __repr__(self):
        return f"Tensor(kind={self.kind!r}, shape={self.shape}, entries={self.entries!r})"

    def to_json(self) -> dict:
        if self.kind == "int":
            entries = [str(x) for x in self.entries]
        elif self.kind == "rational":
            entries = [f"{x.numerator}/{x.denominator}" for x in self.entries]
        else:
            entries = [float(x) for x in self.entries]
        out: dict[str, Any] = {}
        if self.is_cubical:
            out["order"] = self.order
            out["dim"] = self.dim
        else:
            out["order"] = self.order
            out["shape"] = list(self.shape)
        out["scalar"] = self.kind
        out["entries"] = entries
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "Tensor":
        try:
            kind = obj["scalar"]
            order = int(obj["order"])
            shape = tuple(obj["shape"]) if "shape" in obj else (int(obj["dim"]),) * order
            raw = obj["entries"]
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"malformed tensor JSON: {exc}") from None
        if kind not in KINDS:
            raise UsageError(f"unknown scalar kind {kind!r}")
        try:
            if kind == "int":
                entries = [int(x) for x in raw]
            elif kind == "rational":
                entries = [Fraction(x) for x in raw]
            else:
                entries = [float(x) for x in raw]
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise UsageError(f"malformed tensor entry: {exc}") from None
        return cls.from_flat(shape, entries, kind)


def _same_kind(*tensors: Tensor) -> str:
    kinds = {t.kind for t in tensors}
    if len(kinds) != 1:
        raise UsageError(f"mixed scalar kinds {sorted(kinds)}; convert explicitly with astype")
    return kinds.pop()


def _same_shape(a: Tensor, b: Tensor) -> None:
    if a.shape != b.shape:
        raise UsageError(f"shape mismatch {a.shape} vs {b.shape}")


def as_tensor(x, kind: str | None = None) -> Tensor:
    if isinstance(x, Tensor):
        return x if kind is None else x.astype(kind)
    return Tensor(x, kind)


def _contract(subscripts: str, kind: str, *arrays: np.ndarray) -> np.ndarray:
    """einsum that stays exact for object arrays and uses int64 when provably safe."""
    if kind == "float64":
        return np.einsum(subscripts, *arrays)
    if kind == "int":
        inputs, output = subscripts.split("->")
        summed = set("".join(inputs.split(","))) - set(output)
        extents = {}
        for spec, arr in zip(inputs.split(","), arrays):
            extents.update(zip(spec, arr.shape))
        bound = math.prod(extents[c] for c in summed) if summed else 1
        for arr in arrays:
            bound *= max((abs(x) for x in arr.ravel().tolist()), default=0)
            if bound >= _INT64_SAFE:
                break
        if bound < _INT64_SAFE:
            fast = np.einsum(subscripts, *(a.astype(np.int64) for a in arrays))
            return fast.astype(object)
    return np.einsum(subscripts, *arrays)


def _letters(count: int) -> str:
    if count > 40:
        raise UsageError(f"order {count} is beyond the supported range")
    return string.ascii_letters[:count]


# ---------------------------------------------------------------------------
# constructors


def outer_power(v: Sequence, m: int) -> Tensor:
    if m < 1:
        raise UsageError(f"order must be positive, got {m}")
    vec = as_tensor(v)
    if vec.order != 1:
        raise UsageError("outer_power expects a vector")
    arr = vec.data
    out = arr
    for _ in range(m - 1):
        out = np.multiply.outer(out, arr)
    return Tensor._wrap(out, vec.kind)


def make_diagonal(d: Sequence, m: int) -> Tensor:
    if m < 1:
        raise UsageError(f"order must be positive, got {m}")
    vec = as_tensor(d)
    if vec.order != 1:
        raise UsageError("make_diagonal expects a vector of diagonal entries")
    n = vec.shape[0]
    out = Tensor.zeros((n,) * m, vec.kind).data.copy()
    for i, x in enumerate(vec.data.tolist()):
        out[(i,) * m] = x
    return Tensor._wrap(out, vec.kind)


def identity_tensor(m: int, n: int) -> Tensor:
    return make_diagonal([1] * n, m)


def permutation_matrix(sigma: Sequence[int]) -> Tensor:
    """Matrix P with P[i, sigma[i]] = 1, so (T x_1 P ... x_m P) picks t[sigma(i1), ...]."""
    sigma = _check_permutation(sigma)
    n = len(sigma)
    rows = [[1 if j == sigma[i] else 0 for j in range(n)] for i in range(n)]
    return Tensor(rows, "int")


def _check_permutation(sigma: Sequence[int]) -> list[int]:
    try:
        sigma = [int(s) for s in sigma]
    except (TypeError, ValueError):
        raise UsageError("permutation entries must be integers") from None
    if sorted(sigma) != list(range(len(sigma))):
        raise UsageError(f"{sigma} is not a permutation of 0..{len(sigma) - 1}")
    return sigma


# ---------------------------------------------------------------------------
# products


def k_mode_product(T: Tensor, B, k: int) -> Tensor:
    """Contract mode ``k`` (1-based) of ``T`` against the columns of ``B``.

    ``B`` has shape (J, I_k); the result has extent J in mode ``k``.
    """
    B = as_tensor(B)
    kind = _same_kind(T, B)
    m = T.order
    if not 1 <= k <= m:
        raise UsageError(f"mode {k} out of range 1..{m}")
    if B.order != 2 or B.shape[1] != T.shape[k - 1]:
        raise UsageError(f"matrix of shape {B.shape} cannot act on mode {k} of extent {T.shape[k - 1]}")
    idx = _letters(m + 1)
    t_idx, new = idx[:m], idx[m]
    out_idx = t_idx[: k - 1] + new + t_idx[k:]
    return Tensor._wrap(_contract(f"{t_idx},{new}{t_idx[k - 1]}->{out_idx}", kind, T.data, B.data), kind)


def multi_mode_product(D: Tensor, E) -> Tensor:
    """``D x_1 E x_2 E ... x_m E``."""
    E = as_tensor(E)
    out = D
    for k in range(1, D.order + 1):
        out = k_mode_product(out, E, k)
    return out


def general_product(A: Tensor, B: Tensor) -> Tensor:
    """Composite of two cubical tensors of equal dimension.

    ``(A . B)[i, alpha_1, ..., alpha_{m-1}] =
    sum_{j_2..j_m} a[i, j_2, ..., j_m] b[j_2, alpha_1] ... b[j_m, alpha_{m-1}]``
    with each ``alpha`` a multi-index of length ``order(B) - 1``.  The result
    has order ``(m-1)(k-1)+1``; for two matrices it is the matrix product.
    """
    A, B = as_tensor(A), as_tensor(B)
    kind = _same_kind(A, B)
    if not (A.is_cubical and B.is_cubical):
        raise UsageError("general_product is only defined for cubical tensors")
    n = A.dim
    if B.dim != n:
        raise UsageError(f"dimension mismatch {n} vs {B.dim}")
    m, k = A.order, B.order
    # b[j, alpha] as a matrix (n^{k-1}) x n acting on each trailing mode of A
    acting = Tensor._wrap(np.ascontiguousarray(B.data.reshape(n, n ** (k - 1)).T), kind)
    out = A
    for mode in range(2, m + 1):
        out = k_mode_product(out, acting, mode)
    new_order = (m - 1) * (k - 1) + 1
    return Tensor._wrap(out.data.reshape((n,) * new_order), kind)


def transpose(M: Tensor) -> Tensor:
    M = as_tensor(M)
    if M.order != 2:
        raise UsageError("transpose expects a matrix")
    return Tensor._wrap(np.ascontiguousarray(M.data.T), M.kind)


def hadamard(A: Tensor, B: Tensor) -> Tensor:
    kind = _same_kind(A, B)
    _same_shape(A, B)
    return Tensor._wrap(A.data * B.data, kind)


def entrywise_map(A: Tensor, f: Callable) -> Tensor:
    """Apply ``f`` to every entry; the result kind follows the values returned."""
    try:
        values = [f(x) for x in A.entries]
    except (ArithmeticError, ValueError, TypeError, LookupError) as exc:
        raise DomainError(f"function undefined on an entry: {exc}") from None
    for v in values:
        if isinstance(v, complex):
            raise DomainError(f"function produced the non-real value {v!r}")
        if isinstance(v, float) and math.isnan(v):
            raise DomainError("function produced NaN")
    kind = infer_kind(values)
    arr = np.empty(len(values), dtype=object if kind != "float64" else np.float64)
    arr[:] = values
    return Tensor(arr.reshape(A.shape), kind)


def power_function(r) -> Callable:
    """``t -> t ** r`` that stays exact for integer exponents."""
    if isinstance(r, Fraction) and r.denominator == 1:
        r = r.numerator
    if isinstance(r, float) and r.is_integer():
        r = int(r)
    if isinstance(r, int):
        if r >= 0:
            return lambda t: t**r
        return lambda t: Fraction(t) ** r if not isinstance(t, float) else t**r
    rf = float(r)

    def power(t):
        if t < 0:
            raise ValueError(f"{t} has no real power {r}")
        if t == 0 and rf < 0:
            raise ZeroDivisionError(f"0 raised to the negative power {r}")
        return float(t) ** rf

    return power


def hadamard_power(A: Tensor, r) -> Tensor:
    """Entrywise power ``a ** r``; exact for integer ``r``, float64 otherwise."""
    f = power_function(r)
    exact_exponent = isinstance(r, int) or (isinstance(r, Fraction) and r.denominator == 1) or (
        isinstance(r, float) and r.is_integer())
    if exact_exponent or A.kind == "rational":
        return entrywise_map(A, f)
    base = A.astype("float64").data if A.kind == "int" else A.data
    if np.any(base < 0) or np.isnan(base).any():
        return entrywise_map(A, f)  # reports the offending entry
    rf = float(r)
    if rf < 0 and np.any(base == 0):
        return entrywise_map(A, f)
    return Tensor._wrap(np.power(base, rf), "float64")


# ---------------------------------------------------------------------------
# forms, permutations, symmetry


class FormValue(NamedTuple):
    value: Any
    gradient_vector: tuple


def eval_form(A: Tensor, x: Sequence) -> FormValue:
    """Return ``A x^m`` and the vector ``A x^{m-1}``.

    For symmetric ``A`` the gradient of ``x -> A x^m`` is ``m * A x^{m-1}``.
    """
    n = A.dim
    if A.kind == "float64":
        xv = np.asarray(x, dtype=np.float64)
    else:
        xv = np.empty(len(x), dtype=object)
        xv[:] = list(x)
    if xv.shape != (n,):
        raise UsageError(f"vector of length {len(xv)} does not match dimension {n}")
    r = A.data
    for _ in range(A.order - 1):
        r = np.dot(r, xv)
    vec = r if A.order > 1 else A.data
    value = np.dot(vec, xv)
    if A.kind == "float64":
        return FormValue(float(value), tuple(float(v) for v in vec))
    return FormValue(value, tuple(vec.tolist()))


def permute_congruence(T: Tensor, sigma: Sequence[int]) -> Tensor:
    """Entry ``(i_1..i_m)`` of the result is ``t[sigma[i_1], ..., sigma[i_m]]`` (0-based)."""
    sigma = _check_permutation(sigma)
    if len(sigma) != T.dim:
        raise UsageError(f"permutation of length {len(sigma)} for dimension {T.dim}")
    out = T.data[np.ix_(*([sigma] * T.order))]
    return Tensor._wrap(np.ascontiguousarray(out), T.kind)


def symmetry_check(T: Tensor) -> bool:
    if not T.is_cubical:
        return False
    m = T.order
    if m == 1:
        return True
    # a transposition and the full cycle generate every index permutation
    arr = T.data
    swap = list(range(m))
    swap[0], swap[1] = 1, 0
    cycle = list(range(1, m)) + [0]
    return bool(np.array_equal(arr, arr.transpose(swap)) and np.array_equal(arr, arr.transpose(cycle)))


def relative_error(a: Tensor, b: Tensor) -> float:
    """max |a - b| / max |b| computed in float64 (0 when both vanish)."""
    _same_shape(a, b)
    x = a.astype("float64").data
    y = b.astype("float64").data
    scale = float(np.max(np.abs(y))) if y.size else 0.0
    diff = float(np.max(np.abs(x - y))) if y.size else 0.0
    if scale == 0.0:
        return diff
    return diff / scale
