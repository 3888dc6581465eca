"""Meet semilattices and meet tensors.

A ``MeetSemilattice`` is built from an arbitrary set of order pairs: the
reflexive-transitive closure is taken, antisymmetry and the unique-meet
property are checked eagerly, and the full meet table is stored, so every
query afterwards is a lookup.  Labels can be any hashable values.
"""

from __future__ import annotations

from collections.abc import Callable, Hashable, Iterable, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from .determinant import DetReport, _power_report, det_exponent
from .errors import ClosureError, LatticeError, UsageError
from .gcdtensor import CpDecomposition, IncidenceMatrix, _check_order
from .tensor import Tensor, infer_kind, make_diagonal, multi_mode_product


class MeetSemilattice:
    """Finite poset in which every pair has a greatest common lower bound."""

    def __init__(self, elements: Sequence[Hashable], below: np.ndarray, meet: np.ndarray):
        self.elements = tuple(elements)
        self.index = {e: i for i, e in enumerate(self.elements)}
        self._below = below
        self._meet = meet
        self._below.flags.writeable = False
        self._meet.flags.writeable = False

    def __len__(self):
        return len(self.elements)

    def __contains__(self, item):
        return item in self.index

    def _idx(self, item) -> int:
        try:
            return self.index[item]
        except (KeyError, TypeError):
            raise UsageError(f"unknown element {item!r}") from None

    def below(self, a, b) -> bool:
        """True when ``a`` is below (or equal to) ``b``."""
        return bool(self._below[self._idx(a), self._idx(b)])

    def meet(self, a, b):
        return self.elements[self._meet[self._idx(a), self._idx(b)]]

    @property
    def meet_table(self) -> np.ndarray:
        """Index table: ``meet_table[i, j]`` is the index of the meet of elements i and j."""
        return self._meet

    def order_pairs(self) -> list[tuple]:
        """Every related pair (a, b) with a strictly below b."""
        n = len(self.elements)
        return [
            (self.elements[i], self.elements[j])
            for i in range(n)
            for j in range(n)
            if i != j and self._below[i, j]
        ]

    def linear_extension(self, items: Iterable) -> list:
        """``items`` sorted so that lower elements come first; ties keep input order."""
        items = list(items)
        remaining = list(items)
        out = []
        while remaining:
            for k, x in enumerate(remaining):
                if not any(y != x and self.below(y, x) for y in remaining):
                    out.append(remaining.pop(k))
                    break
        return out

    def to_json(self) -> dict:
        return {
            "elements": [_label_json(e) for e in self.elements],
            "pairs": [[_label_json(a), _label_json(b)] for a, b in self.order_pairs()],
        }


def _label_json(x):
    if isinstance(x, frozenset):
        return sorted(_label_json(v) for v in x)
    return x


def label_str(x) -> str:
    """Display form of a label; sets print as ``{a,b}`` and the empty set as ``{}``."""
    if isinstance(x, frozenset):
        return "{" + ",".join(sorted(label_str(v) for v in x)) + "}"
    return str(x)


def build_lattice(elements: Sequence[Hashable], order_pairs: Iterable[tuple]) -> MeetSemilattice:
    """Validate a finite meet semilattice given by generating pairs ``(a, b)`` meaning a below b."""
    elements = list(elements)
    if len(set(elements)) != len(elements):
        raise UsageError("lattice elements must be distinct")
    index = {e: i for i, e in enumerate(elements)}
    n = len(elements)
    if n == 0:
        raise UsageError("a lattice needs at least one element")
    below = np.eye(n, dtype=bool)
    for pair in order_pairs:
        try:
            a, b = pair
        except (TypeError, ValueError):
            raise UsageError(f"order pair {pair!r} is not a pair") from None
        if a not in index or b not in index:
            raise UsageError(f"order pair {pair!r} uses an undeclared element")
        below[index[a], index[b]] = True
    # Warshall closure
    for k in range(n):
        below |= below[:, k][:, None] & below[k, :][None, :]
    both = below & below.T
    np.fill_diagonal(both, False)
    if both.any():
        i, j = map(int, np.argwhere(both)[0])
        raise LatticeError(
            f"not a partial order: {elements[i]!r} and {elements[j]!r} are below each other", (elements[i], elements[j])
        )

    meet = np.empty((n, n), dtype=np.int64)
    for i in range(n):
        meet[i, i] = i
        for j in range(i + 1, n):
            lower = np.flatnonzero(below[:, i] & below[:, j])
            greatest = [w for w in lower if below[lower, w].all()]
            if not greatest:
                raise LatticeError(
                    f"not a meet semilattice: {elements[i]!r} and {elements[j]!r} have no unique meet",
                    (elements[i], elements[j]),
                )
            meet[i, j] = meet[j, i] = greatest[0]
    return MeetSemilattice(elements, below, meet)


def divisibility_lattice(values: Iterable[int]) -> MeetSemilattice:
    """Divisibility order on a set of positive integers (meets must stay inside the set)."""
    values = sorted(set(int(v) for v in values))
    pairs = [(a, b) for a, b in combinations(values, 2) if b % a == 0]
    return build_lattice(values, pairs)


def subset_lattice(ground: Iterable[Hashable]) -> MeetSemilattice:
    """All subsets of ``ground`` (as frozensets) ordered by inclusion."""
    ground = list(ground)
    subsets = [frozenset(c) for k in range(len(ground) + 1) for c in combinations(ground, k)]
    pairs = [(a, b) for a in subsets for b in subsets if a < b]
    return build_lattice(subsets, pairs)


def chain(labels: Sequence[Hashable]) -> MeetSemilattice:
    return build_lattice(labels, list(zip(labels, labels[1:])))


def meet_many(L: MeetSemilattice, items: Iterable):
    items = list(items)
    if not items:
        raise UsageError("meet_many needs at least one element")
    acc = L._idx(items[0])
    for x in items[1:]:
        acc = L.meet_table[acc, L._idx(x)]
    return L.elements[acc]


def _subset(L: MeetSemilattice, S: Iterable) -> list:
    S = list(S)
    if not S:
        raise UsageError("subset must be nonempty")
    for s in S:
        L._idx(s)
    if len(set(S)) != len(S):
        raise UsageError("subset elements must be distinct")
    return S


def meet_closure(L: MeetSemilattice, S: Iterable) -> list:
    """Smallest meet-closed superset of ``S``: ``S`` first, added meets after in discovery order."""
    out = _subset(L, S)
    present = set(out)
    k = 0
    while k < len(out):
        a = out[k]
        for b in out[: k + 1]:
            w = L.meet(a, b)
            if w not in present:
                present.add(w)
                out.append(w)
        k += 1
    return out


def missing_meet(L: MeetSemilattice, S: Iterable):
    S = list(S)
    present = set(S)
    for a, b in combinations(S, 2):
        w = L.meet(a, b)
        if w not in present:
            return (a, b, w)
    return None


def is_meet_closed(L: MeetSemilattice, S: Iterable) -> bool:
    return missing_meet(L, _subset(L, S)) is None


def _valuation(g) -> Callable:
    if isinstance(g, Mapping):
        mapping = g

        def value(x):
            try:
                return mapping[x]
            except KeyError:
                raise UsageError(f"valuation is not defined at {x!r}") from None

        return value
    return g


def poset_totient(L: MeetSemilattice, S: Iterable, g) -> dict:
    """``Psi(s) = g(s) - sum of Psi(t)`` over ``t`` in ``S`` strictly below ``s``."""
    S = _subset(L, S)
    g = _valuation(g)
    psi = {}
    done = []
    for s in L.linear_extension(S):
        psi[s] = g(s) - sum((psi[t] for t in done if L.below(t, s)), 0)
        done.append(s)
    return {s: psi[s] for s in S}


def build_meet_tensor(L: MeetSemilattice, S: Iterable, g, m: int) -> Tensor:
    """``t[i1..im] = g(meet(s_i1, ..., s_im))``."""
    S = _subset(L, S)
    m = _check_order(m)
    idx = np.array([L._idx(s) for s in S], dtype=np.int64)
    table = L.meet_table
    out = idx
    for _ in range(m - 1):
        out = table[out[..., None], idx]
    g = _valuation(g)
    used = np.unique(out)
    values = [g(L.elements[int(i)]) for i in used]
    kind = infer_kind(values)
    lookup = np.zeros(len(L), dtype=np.float64 if kind == "float64" else object)
    lookup[used] = values
    return Tensor(lookup[out], kind)


def meet_incidence(L: MeetSemilattice, S: Sequence, F: Sequence) -> IncidenceMatrix:
    rows = [[1 if L.below(f, s) else 0 for f in F] for s in S]
    return IncidenceMatrix(tuple(S), tuple(F), Tensor(rows, "int"))


@dataclass(frozen=True)
class MeetFactorization:
    decomposition: CpDecomposition
    D: Tensor
    E: IncidenceMatrix

    def product(self) -> Tensor:
        """``D x_1 E ... x_m E``, with the 0/1 matrix cast to the kind of ``D``."""
        return multi_mode_product(self.D, self.E.matrix.astype(self.D.kind))


def meet_decompose_factorize(L: MeetSemilattice, S: Iterable, g, m: int, F: Iterable | None = None) -> MeetFactorization:
    """Weights ``Psi_{F,g}`` over a meet-closed ``F`` containing ``S``.

    The identities ``T = sum_k Psi(f_k) E_k^{(x) m} = diag(Psi) x_1 E ... x_m E``
    hold for any real valuation; weights may be zero or negative, so no
    positivity claim is attached.  ``F`` defaults to the meet closure of ``S``.
    """
    S = _subset(L, S)
    m = _check_order(m)
    F = meet_closure(L, S) if F is None else _subset(L, F)
    missing = [s for s in S if s not in set(F)]
    if missing:
        raise UsageError(f"{missing[0]!r} is in S but not in F")
    gap = missing_meet(L, F)
    if gap is not None:
        a, b, w = gap
        raise ClosureError(f"F is not meet-closed: meet of {a!r} and {b!r} is {w!r}", missing=w)
    psi = poset_totient(L, F, g)
    weights = tuple(psi[f] for f in F)
    E = meet_incidence(L, S, F)
    decomposition = CpDecomposition(
        order=m,
        dim=len(S),
        weights=weights,
        vectors=tuple(E.columns),
        scheme="meet",
        labels=tuple(F),
        warning="meet decompositions carry no positivity certificate",
    )
    return MeetFactorization(decomposition, make_diagonal(list(weights), m), E)


def det_closed_form_meet(L: MeetSemilattice, S: Iterable, g, m: int) -> DetReport:
    """``prod Psi_{S,g}(s) ** ((m-1) ** (n-1))`` for meet-closed ``S``."""
    S = _subset(L, S)
    m = _check_order(m)
    gap = missing_meet(L, S)
    if gap is not None:
        a, b, w = gap
        raise ClosureError(f"set not meet-closed: meet of {a!r} and {b!r} is {w!r}", missing=w)
    psi = poset_totient(L, S, g)
    bases = [psi[s] for s in S]
    if any(isinstance(b, float) for b in bases):
        bases = [Fraction(b) for b in bases]
    return _power_report("closed_form_meet", bases, det_exponent(m, len(S)))


def lattice_from_json(obj: dict) -> tuple[MeetSemilattice, dict | None]:
    """Parse ``{"elements": [...], "pairs": [[a, b], ...], "g": {label: value}}``."""
    try:
        elements = [_label_from_json(e) for e in obj["elements"]]
        pairs = [(_label_from_json(a), _label_from_json(b)) for a, b in obj.get("pairs", [])]
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed lattice JSON: {exc}") from None
    L = build_lattice(elements, pairs)
    g = None
    raw_g = obj.get("g")
    if isinstance(raw_g, list):
        if len(raw_g) != len(elements):
            raise UsageError("valuation list must have one value per element")
        g = {e: _parse_value(v) for e, v in zip(elements, raw_g)}
    elif raw_g is not None:
        g = {}
        for key, raw in raw_g.items():
            g[resolve_label(L, key)] = _parse_value(raw)
    return L, g


def resolve_label(L: MeetSemilattice, text):
    """Find the element whose display form (or JSON value) is ``text``."""
    if text in L:
        return text
    for e in L.elements:
        if label_str(e) == str(text):
            return e
    raise UsageError(f"unknown element {text!r}")


def _label_from_json(x):
    if isinstance(x, list):
        return frozenset(_label_from_json(v) for v in x)
    return x


def _parse_value(raw):
    if isinstance(raw, float):
        return raw
    if isinstance(raw, int):
        return raw
    value = Fraction(str(raw))
    return value.numerator if value.denominator == 1 else value
