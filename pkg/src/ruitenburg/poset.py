"""Finite posets, rooted posets, label posets and maps between them.

The order is stored as a full boolean matrix ``le[i, j] == (i <= j)`` after
transitive closure of the input edges, so every order query is a lookup.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cache, cached_property
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np

__all__ = [
    "PosetError", "Poset", "RootedPoset", "PosetMap",
    "chain", "antichain_with_root", "two", "powerset", "one_point",
    "product_labels", "height", "downset", "is_open",
    "canonical_form", "rooted_posets", "all_rooted_posets",
    "downsets", "format_model", "parse_model",
]


class PosetError(ValueError):
    pass


class NotOrderPreservingError(PosetError):
    pass


def _closure(n: int, pairs: Iterable[tuple[int, int]]) -> np.ndarray:
    le = np.eye(n, dtype=bool)
    for i, j in pairs:
        le[i, j] = True
    # Warshall
    for k in range(n):
        le |= le[:, k : k + 1] & le[k : k + 1, :]
    return le


class Poset:
    """A finite poset on points ``0..n-1`` with optional element names."""

    def __init__(self, le: np.ndarray, names: Sequence[Hashable] | None = None,
                 check: bool = True):
        le = np.array(le, dtype=bool)
        n = le.shape[0]
        if le.shape != (n, n):
            raise PosetError("order matrix must be square")
        if check:
            if not le.diagonal().all():
                raise PosetError("order is not reflexive")
            if (le & le.T & ~np.eye(n, dtype=bool)).any():
                raise PosetError("order is not antisymmetric")
            if ((le.astype(np.uint8) @ le.astype(np.uint8) > 0) & ~le).any():
                raise PosetError("order is not transitive")
        le.setflags(write=False)
        self.le = le
        self.n = n
        self.names = list(names) if names is not None else list(range(n))
        if len(self.names) != n:
            raise PosetError("one name per point required")
        self._index = {name: i for i, name in enumerate(self.names)}
        if len(self._index) != n:
            raise PosetError("point names must be distinct")

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[tuple[int, int]],
                   names: Sequence[Hashable] | None = None) -> "Poset":
        """Build from ``(i, j)`` pairs meaning ``i <= j`` (closure is taken)."""
        return cls(_closure(n, pairs), names)

    @classmethod
    def from_relation(cls, elements: Sequence[Hashable],
                      leq: Callable[[Hashable, Hashable], bool]) -> "Poset":
        le = np.array([[leq(a, b) for b in elements] for a in elements], dtype=bool)
        return cls(le, elements)

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.n}, covers={self.covers()})"

    def __eq__(self, other) -> bool:
        return (isinstance(other, Poset) and self.names == other.names
                and np.array_equal(self.le, other.le))

    def __hash__(self) -> int:
        return hash((tuple(self.names), self.le.tobytes()))

    def index(self, name: Hashable) -> int:
        return self._index[name]

    def leq(self, i: int, j: int) -> bool:
        return bool(self.le[i, j])

    def below(self, p: int) -> list[int]:
        """Points ``q <= p``."""
        return np.flatnonzero(self.le[:, p]).tolist()

    def strictly_below(self, p: int) -> list[int]:
        return [q for q in self.below(p) if q != p]

    def above(self, p: int) -> list[int]:
        return np.flatnonzero(self.le[p, :]).tolist()

    @cached_property
    def lt(self) -> np.ndarray:
        return self.le & ~np.eye(self.n, dtype=bool)

    def covers(self) -> list[tuple[int, int]]:
        """Covering pairs ``(i, j)``: ``i < j`` with nothing in between."""
        lt = self.lt
        between = (lt.astype(np.uint8) @ lt.astype(np.uint8)) > 0
        cov = lt & ~between
        return [(int(i), int(j)) for i, j in zip(*np.nonzero(cov))]

    @cached_property
    def heights(self) -> tuple[int, ...]:
        """``heights[p]``: size of the longest chain with maximum ``p``."""
        h = [0] * self.n
        order = sorted(range(self.n), key=lambda p: int(self.le[:, p].sum()))
        for p in order:
            h[p] = 1 + max((h[q] for q in self.strictly_below(p)), default=0)
        return tuple(h)

    def height(self) -> int:
        return max(self.heights, default=0)

    def maximal(self) -> list[int]:
        return [p for p in range(self.n) if self.le[p].sum() == 1]

    def minimal(self) -> list[int]:
        return [p for p in range(self.n) if self.le[:, p].sum() == 1]

    def root(self) -> int | None:
        tops = [p for p in range(self.n) if self.le[:, p].all()]
        return tops[0] if tops else None

    def is_downset(self, points: Iterable[int]) -> bool:
        s = set(points)
        return all(q in s for p in s for q in self.below(p))

    def down_closure(self, points: Iterable[int]) -> frozenset[int]:
        out: set[int] = set()
        for p in points:
            out.update(self.below(p))
        return frozenset(out)

    def induced(self, points: Sequence[int]) -> "Poset":
        idx = list(points)
        return Poset(self.le[np.ix_(idx, idx)], [self.names[i] for i in idx], check=False)

    def is_order_preserving(self, f: Sequence[int], target: "Poset") -> bool:
        return all(target.le[f[i], f[j]] for i, j in zip(*np.nonzero(self.le)))


class RootedPoset(Poset):
    """A finite poset with a greatest element."""

    def __init__(self, le: np.ndarray, names: Sequence[Hashable] | None = None,
                 check: bool = True):
        super().__init__(le, names, check)
        r = super().root()
        if r is None:
            raise PosetError("poset has no greatest element")
        self.root_point = r

    @classmethod
    def from_pairs(cls, n, pairs, names=None) -> "RootedPoset":
        return cls(_closure(n, pairs), names)

    def root(self) -> int:
        return self.root_point


@dataclass(frozen=True)
class PosetMap:
    source: Poset
    target: Poset
    images: tuple[int, ...]

    def __post_init__(self):
        if len(self.images) != self.source.n:
            raise PosetError("map must send every source point somewhere")

    def __call__(self, p: int) -> int:
        return self.images[p]

    def is_order_preserving(self) -> bool:
        return self.source.is_order_preserving(self.images, self.target)

    def compose(self, other: "PosetMap") -> "PosetMap":
        """``other ∘ self``."""
        return PosetMap(self.source, other.target,
                        tuple(other.images[i] for i in self.images))

    def inverse_image(self, points: Iterable[int]) -> frozenset[int]:
        s = set(points)
        return frozenset(p for p in range(self.source.n) if self.images[p] in s)


# -------------------------------------------------------------- constructors

def chain(n: int) -> RootedPoset:
    """Chain ``0 < 1 < ... < n-1``; the root is ``n-1``."""
    return RootedPoset.from_pairs(n, [(i, i + 1) for i in range(n - 1)])


def antichain_with_root(k: int) -> RootedPoset:
    """``k`` incomparable points below a root (the root is point ``k``)."""
    return RootedPoset.from_pairs(k + 1, [(i, k) for i in range(k)])


def one_point() -> RootedPoset:
    return chain(1)


def two() -> Poset:
    """The label poset ``{0, 1}`` with ``1 <= 0``; names are the ints 0, 1."""
    return Poset(np.array([[True, False], [True, True]]), [0, 1])


def powerset(variables: Iterable[str]) -> Poset:
    """Subsets of ``variables`` ordered by reverse inclusion."""
    vs = sorted(set(variables))
    subsets = [frozenset(c) for r in range(len(vs) + 1)
               for c in itertools.combinations(vs, r)]
    return Poset.from_relation(subsets, lambda a, b: a >= b)


def product_labels(l1: Poset, l2: Poset) -> Poset:
    """Componentwise order on ``l1 x l2``; names are pairs of names."""
    elements = [(a, b) for a in range(l1.n) for b in range(l2.n)]
    le = np.array([[l1.le[a, c] and l2.le[b, d] for (c, d) in elements]
                   for (a, b) in elements], dtype=bool)
    return Poset(le, [(l1.names[a], l2.names[b]) for a, b in elements], check=False)


# ----------------------------------------------------------------- queries

def height(p: Poset) -> int:
    return p.height()


def downset(p: RootedPoset, q: int) -> RootedPoset:
    """Sub-poset induced on ``{q' <= q}``, rooted at ``q``.

    Point names are carried over from ``p``.
    """
    idx = p.below(q)
    return RootedPoset(p.le[np.ix_(idx, idx)], [p.names[i] for i in idx], check=False)


def is_open(f: PosetMap) -> bool:
    """``p <= f(q)`` implies some ``q' <= q`` with ``f(q') = p``."""
    if not f.is_order_preserving():
        raise NotOrderPreservingError("open-map check needs an order-preserving map")
    src, tgt = f.source, f.target
    for q in range(src.n):
        hit = {f.images[r] for r in src.below(q)}
        for p in tgt.below(f.images[q]):
            if p not in hit:
                return False
    return True


@cache
def _downsets_cached(le_bytes: bytes, n: int) -> np.ndarray:
    le = np.frombuffer(le_bytes, dtype=bool).reshape(n, n)
    rows: list[tuple[bool, ...]] = []
    # points in a linear extension from the bottom; a downset is decided
    # by including a point only if everything below it is included
    order = sorted(range(n), key=lambda p: int(le[:, p].sum()))
    below = [np.flatnonzero(le[:, p]).tolist() for p in range(n)]

    def extend(k: int, chosen: list[bool]):
        if k == n:
            rows.append(tuple(chosen))
            return
        p = order[k]
        chosen[p] = False
        extend(k + 1, chosen)
        if all(chosen[q] for q in below[p] if q != p):
            chosen[p] = True
            extend(k + 1, chosen)
            chosen[p] = False

    extend(0, [False] * n)
    out = np.array(rows, dtype=bool).reshape(len(rows), n)
    # canonical order: by size, then lexicographic
    keys = sorted(range(len(out)), key=lambda i: (int(out[i].sum()), tuple(~out[i])))
    out = out[keys]
    out.setflags(write=False)
    return out


def downsets(p: Poset) -> np.ndarray:
    """All downward closed subsets as rows of a boolean matrix."""
    return _downsets_cached(np.ascontiguousarray(p.le).tobytes(), p.n)


# --------------------------------------------------------- canonical forms

def _refine(le: np.ndarray) -> list[int]:
    """Colour refinement on the order relation, seeded by up/down degree."""
    n = le.shape[0]
    lt = le & ~np.eye(n, dtype=bool)
    heights = [0] * n
    for p in sorted(range(n), key=lambda p: int(le[:, p].sum())):
        heights[p] = 1 + max((heights[q] for q in range(n) if lt[q, p]), default=0)
    colour = [(heights[p], int(lt[:, p].sum()), int(lt[p].sum())) for p in range(n)]
    while True:
        sig = [(colour[p],
                tuple(sorted(colour[q] for q in range(n) if lt[q, p])),
                tuple(sorted(colour[q] for q in range(n) if lt[p, q])))
               for p in range(n)]
        ranks = {s: i for i, s in enumerate(sorted(set(sig)))}
        new = [ranks[s] for s in sig]
        if len(set(new)) == len(set(colour)):
            return new
        colour = new


def canonical_form(le: np.ndarray) -> tuple[tuple[int, ...], bytes]:
    """Return ``(perm, code)`` with ``code`` an isomorphism invariant.

    Points are ordered by refined colour; ties are broken by trying every
    permutation inside each colour class and keeping the smallest matrix.
    ``perm[k]`` is the old index of the new point ``k``.
    """
    le = np.asarray(le, dtype=bool)
    n = le.shape[0]
    colour = _refine(le)
    # larger colours (higher points) first, so a root lands on index 0
    classes: dict[int, list[int]] = {}
    for p in range(n):
        classes.setdefault(colour[p], []).append(p)
    blocks = [classes[c] for c in sorted(classes, reverse=True)]
    best_perm: tuple[int, ...] | None = None
    best_code: bytes | None = None
    for choice in itertools.product(*(itertools.permutations(b) for b in blocks)):
        perm = tuple(itertools.chain.from_iterable(choice))
        code = np.packbits(le[np.ix_(perm, perm)]).tobytes()
        if best_code is None or code < best_code:
            best_code, best_perm = code, perm
    assert best_perm is not None and best_code is not None
    return best_perm, bytes([n]) + best_code


def canonicalize(p: RootedPoset) -> RootedPoset:
    perm, _ = canonical_form(p.le)
    return RootedPoset(p.le[np.ix_(perm, perm)], check=False)


@cache
def _posets(n: int) -> tuple[np.ndarray, ...]:
    """All posets on ``n`` points up to isomorphism, canonically relabelled."""
    if n == 0:
        return (np.zeros((0, 0), dtype=bool),)
    seen: dict[bytes, np.ndarray] = {}
    for le in _posets(n - 1):
        m = n - 1
        base = Poset(le, check=False)
        # a new minimal point sits below exactly an up-closed set of old points
        for down in downsets(base):
            up = ~down
            new = np.zeros((n, n), dtype=bool)
            new[:m, :m] = le
            new[m, m] = True
            new[m, :m] = up
            perm, code = canonical_form(new)
            if code not in seen:
                seen[code] = new[np.ix_(perm, perm)]
    return tuple(seen[c] for c in sorted(seen))


@cache
def rooted_posets(n: int) -> tuple[RootedPoset, ...]:
    """All rooted posets with exactly ``n`` points, up to isomorphism.

    Each has its root at point 0.  The order is deterministic.
    """
    if n < 1:
        return ()
    out = []
    for le in _posets(n - 1):
        full = np.zeros((n, n), dtype=bool)
        full[:, 0] = True
        full[1:, 1:] = le
        out.append(RootedPoset(full, check=False))
    out.sort(key=lambda r: (r.height(), canonical_form(r.le)[1]))
    return tuple(out)


def all_rooted_posets(max_points: int) -> list[RootedPoset]:
    return [p for n in range(1, max_points + 1) for p in rooted_posets(n)]


# -------------------------------------------------------------- text format

def format_model(p: Poset, labels: Sequence | None = None) -> str:
    """Render in the model text format (``poset n``, ``le i j``, labels).

    Labels are either sets of variable names (``label i x y``) or 0/1
    values of the two-element label poset (``label2 i v``).
    """
    lines = [f"poset {p.n}"]
    lines += [f"le {i} {j}" for i, j in p.covers()]
    if labels is not None:
        for i, lab in enumerate(labels):
            if isinstance(lab, (int, np.integer)) and not isinstance(lab, bool):
                lines.append(f"label2 {i} {int(lab)}")
            else:
                lines.append(" ".join(["label", str(i), *sorted(lab)]))
    return "\n".join(lines) + "\n"


def parse_model(text: str) -> tuple[RootedPoset, list]:
    """Parse the model text format; returns the poset and per-point labels.

    Unlabelled points get the empty set (or 0 if the file uses ``label2``).
    """
    n = None
    pairs: list[tuple[int, int]] = []
    sets: dict[int, frozenset[str]] = {}
    bits: dict[int, int] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        head = parts[0]
        try:
            if head == "poset":
                n = int(parts[1])
            elif head == "le":
                pairs.append((int(parts[1]), int(parts[2])))
            elif head == "label":
                sets[int(parts[1])] = frozenset(parts[2:])
            elif head == "label2":
                if parts[2] not in ("0", "1"):
                    raise PosetError(f"line {lineno}: label2 value must be 0 or 1")
                bits[int(parts[1])] = int(parts[2])
            else:
                raise PosetError(f"line {lineno}: unknown directive {head!r}")
        except (IndexError, ValueError) as exc:
            if isinstance(exc, PosetError):
                raise
            raise PosetError(f"line {lineno}: malformed {head!r} line") from exc
    if n is None:
        raise PosetError("missing 'poset n' header")
    for i, j in pairs:
        if not (0 <= i < n and 0 <= j < n):
            raise PosetError(f"point out of range in 'le {i} {j}'")
    poset = RootedPoset.from_pairs(n, pairs)
    if sets and bits:
        raise PosetError("mixing 'label' and 'label2' lines is not supported")
    if bits:
        labels: list = [bits.get(i, 0) for i in range(n)]
    else:
        labels = [sets.get(i, frozenset()) for i in range(n)]
    return poset, labels
