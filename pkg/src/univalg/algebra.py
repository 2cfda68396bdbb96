"""Finite algebras and the constructions used on them.

Carriers are ``{0, ..., size-1}``.  Operation tables follow the global
assignment-index convention of :mod:`univalg.terms` (argument 0 is the least
significant digit), and the product ``A x B`` encodes ``(a, b)`` as
``a + |A| * b``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Iterator, Sequence

import numpy as np

from .errors import (
    CapExceeded,
    InputError,
    LimitExceeded,
    NotAHomomorphism,
    SignatureMismatch,
    UAError,
)
from .terms import App, Signature, Term, Var

# Largest operation table (entries) a constructed algebra may carry.
DEFAULT_TABLE_CAP = 50_000_000


def tuple_digits(m: int, k: int, indices: np.ndarray | None = None) -> np.ndarray:
    """Digits of assignment indices over an ``m``-element set, shape (k, M)."""
    if indices is None:
        indices = np.arange(m**k, dtype=np.int64)
    out = np.empty((k, len(indices)), dtype=np.int64)
    rest = indices.astype(np.int64, copy=True)
    for j in range(k):
        out[j] = rest % m
        rest //= m
    return out


def combine(values: Sequence[np.ndarray], n: int) -> np.ndarray:
    """Inverse of :func:`tuple_digits`: pack argument columns into indices."""
    if len(values) == 0:
        return np.zeros(1, dtype=np.int64)
    acc = np.zeros(np.shape(values[0]), dtype=np.int64)
    for j in reversed(range(len(values))):
        acc = acc * n + values[j]
    return acc


class FiniteAlgebra:
    """An algebra on ``{0..size-1}`` with total operation tables."""

    def __init__(self, sig: Signature, size: int, tables, name: str = ""):
        if size < 1:
            raise InputError("empty algebras are not supported")
        self.sig = sig
        self.size = int(size)
        self.name = name
        if not isinstance(tables, dict):
            tables = dict(zip(sig.names, tables))
        self._tables: dict[str, np.ndarray] = {}
        for op, arity in sig.ops:
            if op not in tables:
                raise InputError(f"missing table for {op!r}")
            t = np.asarray(tables[op], dtype=np.int64).ravel()
            if t.size != self.size**arity:
                raise InputError(
                    f"table of {op!r} has {t.size} entries, expected {self.size**arity}"
                )
            if t.size and (t.min() < 0 or t.max() >= self.size):
                raise InputError(f"table of {op!r} leaves the carrier")
            t.setflags(write=False)
            self._tables[op] = t

    def table(self, op: str) -> np.ndarray:
        return self._tables[op]

    def table_nd(self, op: str) -> np.ndarray:
        """Table reshaped so that ``T[a0, a1, ...]`` is ``op(a0, a1, ...)``."""
        k = self.sig.arity(op)
        return self._tables[op].reshape((self.size,) * k, order="F")

    def apply(self, op: str, *args: int) -> int:
        idx = 0
        for a in reversed(args):
            idx = idx * self.size + int(a)
        return int(self._tables[op][idx])

    def key(self) -> tuple:
        return (self.sig, self.size) + tuple(
            self._tables[op].tobytes() for op in self.sig.names
        )

    def __eq__(self, other):
        return isinstance(other, FiniteAlgebra) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        label = self.name or "algebra"
        return f"<FiniteAlgebra {label} size={self.size} ops={self.sig.names}>"

    # -- JSON ------------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "size": self.size,
            "operations": [
                {"name": op, "arity": a, "table": [int(v) for v in self._tables[op]]}
                for op, a in self.sig.ops
            ],
        }

    @classmethod
    def from_json(cls, data) -> "FiniteAlgebra":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            ops = data["operations"]
            sig = Signature(tuple((o["name"], int(o["arity"])) for o in ops))
            tables = {o["name"]: o["table"] for o in ops}
            return cls(sig, int(data["size"]), tables, name=data.get("name", ""))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed algebra JSON: {exc}") from exc


def trivial_algebra(sig: Signature, name: str = "trivial") -> FiniteAlgebra:
    return FiniteAlgebra(sig, 1, {op: [0] for op in sig.names}, name=name)


def _same_sig(A: FiniteAlgebra, B: FiniteAlgebra) -> None:
    if A.sig != B.sig:
        raise SignatureMismatch(f"signatures differ: {A.sig.ops} vs {B.sig.ops}")


def _check_table_cap(size: int, sig: Signature, cap: int) -> None:
    for _, arity in sig.ops:
        if size**arity > cap:
            raise CapExceeded(
                f"algebra of size {size} needs a table of {size**arity} entries "
                f"(cap {cap})",
                found=size,
            )


def product(A: FiniteAlgebra, B: FiniteAlgebra, cap: int = DEFAULT_TABLE_CAP) -> FiniteAlgebra:
    _same_sig(A, B)
    size = A.size * B.size
    _check_table_cap(size, A.sig, cap)
    tables = {}
    for op, k in A.sig.ops:
        digits = tuple_digits(size, k)
        a_idx = combine([d % A.size for d in digits], A.size)
        b_idx = combine([d // A.size for d in digits], B.size)
        tables[op] = A.table(op)[a_idx] + A.size * B.table(op)[b_idx]
    name = f"{A.name or 'A'}x{B.name or 'B'}"
    return FiniteAlgebra(A.sig, size, tables, name=name)


def power(A: FiniteAlgebra, d: int, cap: int = DEFAULT_TABLE_CAP) -> FiniteAlgebra:
    """``A**d`` with coordinate 0 as the least significant digit."""
    if d < 0:
        raise ValueError("negative exponent")
    if d == 0:
        return trivial_algebra(A.sig, name=f"{A.name}^0")
    if d == 1:
        return A
    out = A
    for _ in range(d - 1):
        out = product(A, out, cap=cap)
    out.name = f"{A.name}^{d}"
    return out


def coords(element: int, n: int, d: int) -> tuple[int, ...]:
    return tuple((element // n**j) % n for j in range(d))


# -- homomorphisms -------------------------------------------------------------


def is_homomorphism(dom: FiniteAlgebra, cod: FiniteAlgebra, mapping) -> bool:
    return _hom_violation(dom, cod, np.asarray(mapping, dtype=np.int64)) is None


def _hom_violation(dom, cod, h: np.ndarray):
    for op, k in dom.sig.ops:
        digits = tuple_digits(dom.size, k)
        lhs = h[dom.table(op)]
        rhs = cod.table(op)[combine([h[d] for d in digits], cod.size)]
        bad = np.nonzero(lhs != rhs)[0]
        if bad.size:
            args = tuple(int(d[bad[0]]) for d in digits)
            return op, args
    return None


@dataclass(frozen=True, eq=False)
class Homomorphism:
    dom: FiniteAlgebra
    cod: FiniteAlgebra
    map: tuple[int, ...]

    def __post_init__(self):
        _same_sig(self.dom, self.cod)
        m = tuple(int(v) for v in self.map)
        object.__setattr__(self, "map", m)
        if len(m) != self.dom.size or any(v < 0 or v >= self.cod.size for v in m):
            raise NotAHomomorphism("map has the wrong length or leaves the codomain")
        bad = _hom_violation(self.dom, self.cod, np.asarray(m, dtype=np.int64))
        if bad is not None:
            op, args = bad
            raise NotAHomomorphism(f"map does not preserve {op} at {args}")

    def __call__(self, a: int) -> int:
        return self.map[a]

    def __eq__(self, other):
        return (
            isinstance(other, Homomorphism)
            and self.map == other.map
            and self.dom == other.dom
            and self.cod == other.cod
        )

    def __hash__(self):
        return hash(self.map)

    def compose(self, inner: "Homomorphism") -> "Homomorphism":
        """``self o inner``."""
        return Homomorphism(inner.dom, self.cod, tuple(self.map[v] for v in inner.map))

    def image(self) -> list[int]:
        return sorted(set(self.map))

    def is_surjective(self) -> bool:
        return len(set(self.map)) == self.cod.size

    def is_injective(self) -> bool:
        return len(set(self.map)) == self.dom.size


def identity_hom(A: FiniteAlgebra) -> Homomorphism:
    return Homomorphism(A, A, tuple(range(A.size)))


# -- closure engines -----------------------------------------------------------


def bfs_closure(
    seeds: Sequence[Hashable],
    sig: Signature,
    apply: Callable[[str, list, np.ndarray], Sequence[Hashable]],
    cap: int | None = None,
    what: str = "subuniverse",
) -> tuple[list, list[Term]]:
    """Breadth-first closure of ``seeds`` recording one witness term each.

    ``apply(op, elements, digits)`` evaluates ``op`` on the argument tuples
    whose positions in ``elements`` are given column-wise by ``digits``.
    Elements are discovered in rounds; inside a round operations run in
    signature order and argument tuples in assignment-index order, and each
    element keeps the first witness that produced it.  Seed ``i`` has
    witness ``$i``.
    """
    elements: list = []
    witnesses: list[Term] = []
    index: dict = {}

    def add(key, wit):
        if key in index:
            return
        index[key] = len(elements)
        elements.append(key)
        witnesses.append(wit)
        if cap is not None and len(elements) > cap:
            raise CapExceeded(
                f"{what} exceeds cap {cap} ({len(elements)} elements found)",
                found=len(elements),
            )

    for i, s in enumerate(seeds):
        add(s, Var(i))

    prev_start = 0
    first = True
    while True:
        known = len(elements)
        for op, k in sig.ops:
            if k == 0:
                if first:
                    (res,) = apply(op, elements, np.zeros((0, 1), dtype=np.int64))
                    add(res, App(op, ()))
                continue
            total = known**k
            chunk = 1 << 15
            for lo in range(0, total, chunk):
                idx = np.arange(lo, min(total, lo + chunk), dtype=np.int64)
                digits = tuple_digits(known, k, idx)
                if not first:
                    digits = digits[:, digits.max(axis=0) >= prev_start]
                    if digits.shape[1] == 0:
                        continue
                results = apply(op, elements, digits)
                for col, res in enumerate(results):
                    if res not in index:
                        add(res, App(op, tuple(witnesses[int(d[col])] for d in digits)))
        first = False
        if len(elements) == known:
            break
        prev_start = known
    return elements, witnesses


def subalgebra_generate(
    A: FiniteAlgebra, seeds: Sequence[int]
) -> tuple[list[int], list[Term]]:
    """Smallest subuniverse containing ``seeds`` plus a witness term per element.

    Witness terms are over the seed positions: ``$i`` stands for ``seeds[i]``.
    """
    seeds = [int(s) for s in seeds]
    if not seeds and not A.sig.has_constant():
        raise InputError("cannot generate from no seeds without constants")

    def apply(op, elements, digits):
        if digits.shape[0] == 0:
            return [int(A.table(op)[0])]
        elems = np.asarray(elements, dtype=np.int64)
        return A.table(op)[combine([elems[d] for d in digits], A.size)].tolist()

    return bfs_closure(seeds, A.sig, apply)


def close_mask(A: FiniteAlgebra, mask: np.ndarray) -> np.ndarray:
    """Subuniverse generated by the boolean ``mask``, as a new mask."""
    mask = np.array(mask, dtype=bool)
    for op, k in A.sig.ops:
        if k == 0:
            mask[A.table(op)[0]] = True
    while True:
        grew = False
        members = np.nonzero(mask)[0]
        if members.size == 0:
            return mask
        for op, k in A.sig.ops:
            if k == 0:
                continue
            res = A.table_nd(op)[np.ix_(*([members] * k))].ravel()
            new = res[~mask[res]]
            if new.size:
                mask[new] = True
                grew = True
        if not grew:
            return mask


def closure(A: FiniteAlgebra, elements: Iterable[int]) -> frozenset[int]:
    mask = np.zeros(A.size, dtype=bool)
    mask[list(elements)] = True
    return frozenset(np.nonzero(close_mask(A, mask))[0].tolist())


def is_subuniverse(A: FiniteAlgebra, elements: Iterable[int]) -> bool:
    els = set(elements)
    return closure(A, els) == els


def generating_set(A: FiniteAlgebra, start: Sequence[int] = ()) -> list[int]:
    """Greedy generating set extending ``start``.

    Each step adds the element whose closure gain is largest (ties go to the
    smallest element).
    """
    gens = [int(g) for g in start]
    mask = np.zeros(A.size, dtype=bool)
    mask[gens] = True
    mask = close_mask(A, mask)
    while not mask.all():
        best, best_size, best_mask = -1, -1, None
        for a in np.nonzero(~mask)[0]:
            trial = mask.copy()
            trial[a] = True
            trial = close_mask(A, trial)
            sz = int(trial.sum())
            if sz > best_size:
                best, best_size, best_mask = int(a), sz, trial
        gens.append(best)
        mask = best_mask
    return gens


def restrict(A: FiniteAlgebra, elements: Sequence[int], name: str = "") -> FiniteAlgebra:
    """The subalgebra on ``elements``; element ``i`` of the result is ``elements[i]``."""
    elements = [int(e) for e in elements]
    pos = np.full(A.size, -1, dtype=np.int64)
    pos[elements] = np.arange(len(elements))
    m = len(elements)
    elems = np.asarray(elements, dtype=np.int64)
    tables = {}
    for op, k in A.sig.ops:
        digits = tuple_digits(m, k)
        res = pos[A.table(op)[combine([elems[d] for d in digits], A.size)]]
        if (res < 0).any():
            raise UAError("element set is not closed under " + op)
        tables[op] = res
    return FiniteAlgebra(A.sig, m, tables, name=name or f"sub({A.name})")


def enumerate_subuniverses(A: FiniteAlgebra, cap: int = 100_000) -> list[frozenset[int]]:
    """All non-empty subuniverses, ordered by (size, sorted members)."""
    found: set[frozenset[int]] = set()
    queue: list[frozenset[int]] = []

    def push(s: frozenset[int]):
        if s and s not in found:
            found.add(s)
            queue.append(s)
            if len(found) > cap:
                raise CapExceeded(f"more than {cap} subuniverses", found=len(found))

    push(closure(A, ()))
    for a in range(A.size):
        push(closure(A, (a,)))
    while queue:
        s = queue.pop()
        for a in range(A.size):
            if a not in s:
                push(closure(A, s | {a}))
    return sorted(found, key=lambda s: (len(s), sorted(s)))


# -- homomorphism search -------------------------------------------------------


class _HomSearch:
    """Backtracking over images of a generating set with forward propagation.

    Adding generator ``j`` only introduces the elements of stage ``j``; their
    images follow from recorded derivations, and every operation tuple whose
    arguments all live in stages ``<= j`` is checked as soon as the last of
    them gets an image.
    """

    def __init__(self, A: FiniteAlgebra, B: FiniteAlgebra, gens: Sequence[int]):
        _same_sig(A, B)
        self.A, self.B = A, B
        self.gens = [int(g) for g in gens]
        n = A.size
        stage = np.full(n, -1, dtype=np.int64)
        self.derivs: list[list[tuple[int, str, tuple[int, ...]]]] = []
        known: list[int] = []

        def grow(stage_id: int, new_seed: int | None):
            steps = []
            if new_seed is not None and stage[new_seed] < 0:
                stage[new_seed] = stage_id
                known.append(new_seed)
            while True:
                grew = False
                for op, k in A.sig.ops:
                    if k == 0:
                        e = int(A.table(op)[0])
                        if stage[e] < 0:
                            stage[e] = stage_id
                            known.append(e)
                            steps.append((e, op, ()))
                            grew = True
                        continue
                    if not known:
                        continue
                    arr = np.asarray(known, dtype=np.int64)
                    digits = tuple_digits(len(arr), k)
                    args = [arr[d] for d in digits]
                    res = A.table(op)[combine(args, n)]
                    for col in np.nonzero(stage[res] < 0)[0]:
                        e = int(res[col])
                        if stage[e] >= 0:
                            continue
                        stage[e] = stage_id
                        known.append(e)
                        steps.append((e, op, tuple(int(a[col]) for a in args)))
                        grew = True
                if not grew:
                    return steps

        self.derivs.append(grow(0, None))
        self.gen_is_new = []
        for j, g in enumerate(self.gens, start=1):
            self.gen_is_new.append(stage[g] < 0)
            self.derivs.append(grow(j, g))
        if (stage < 0).any():
            raise UAError("given generators do not generate the domain")
        self.stage = stage

        # operation tuples grouped by the stage at which they become checkable
        self.checks: list[list[tuple[str, np.ndarray, np.ndarray]]] = [
            [] for _ in range(len(self.gens) + 1)
        ]
        for op, k in A.sig.ops:
            digits = tuple_digits(n, k)
            st = (
                np.max(stage[digits], axis=0)
                if k
                else np.zeros(1, dtype=np.int64)
            )
            for s in range(len(self.gens) + 1):
                sel = np.nonzero(st == s)[0]
                if sel.size:
                    self.checks[s].append((op, sel, digits[:, sel]))

    def _propagate(self, h: np.ndarray, s: int) -> bool:
        B = self.B
        for e, op, args in self.derivs[s]:
            h[e] = B.table(op)[np.asarray(combine([h[a] for a in args], B.size)).reshape(-1)[0]]
        for op, sel, digits in self.checks[s]:
            lhs = h[self.A.table(op)[sel]]
            rhs = B.table(op)[combine([h[d] for d in digits], B.size)]
            if not np.array_equal(lhs, rhs):
                return False
        return True

    def run(self, fixed: dict[int, int] | None = None) -> Iterator[tuple[int, ...]]:
        fixed = fixed or {}
        h = np.full(self.A.size, -1, dtype=np.int64)
        if not self._propagate(h, 0):
            return
        yield from self._rec(0, h, fixed)

    def _rec(self, j: int, h: np.ndarray, fixed: dict[int, int]):
        if j == len(self.gens):
            yield tuple(int(v) for v in h)
            return
        g = self.gens[j]
        if not self.gen_is_new[j]:
            if g in fixed and fixed[g] != h[g]:
                return
            choices = [None]
        elif g in fixed:
            choices = [fixed[g]]
        else:
            choices = range(self.B.size)
        for c in choices:
            h2 = h.copy()
            if c is not None:
                h2[g] = c
            if self._propagate(h2, j + 1):
                yield from self._rec(j + 1, h2, fixed)


def hom_enumerate(
    A: FiniteAlgebra, B: FiniteAlgebra, limit: int | None = None
) -> list[Homomorphism]:
    """All homomorphisms ``A -> B`` in a deterministic order.

    Raises :class:`LimitExceeded` when more than ``limit`` exist.
    """
    search = _HomSearch(A, B, generating_set(A))
    out = []
    for m in search.run():
        if limit is not None and len(out) >= limit:
            raise LimitExceeded(f"more than {limit} homomorphisms", partial=out)
        out.append(Homomorphism(A, B, m))
    return out


def iter_hom_maps(
    A: FiniteAlgebra,
    B: FiniteAlgebra,
    gens: Sequence[int] | None = None,
    fixed: dict[int, int] | None = None,
) -> Iterator[tuple[int, ...]]:
    """Raw homomorphism maps, optionally with images of some generators fixed."""
    if gens is None:
        gens = generating_set(A)
    return _HomSearch(A, B, gens).run(fixed)


# -- congruences ---------------------------------------------------------------


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if ra < rb:
            self.parent[rb] = ra
        else:
            self.parent[ra] = rb
        return True

    def canonical(self) -> tuple[int, ...]:
        # the root is always the least member because smaller roots win
        return tuple(self.find(a) for a in range(len(self.parent)))


def _canonical(labels: Sequence[int]) -> tuple[int, ...]:
    first: dict[int, int] = {}
    out = []
    for i, lab in enumerate(labels):
        out.append(first.setdefault(int(lab), i))
    return tuple(out)


@dataclass(frozen=True, eq=False)
class Congruence:
    """A congruence stored as block ids, each block named by its least member."""

    algebra: FiniteAlgebra
    blocks: tuple[int, ...]
    _trusted: bool = field(default=False, repr=False)

    def __post_init__(self):
        b = _canonical(self.blocks)
        object.__setattr__(self, "blocks", b)
        if len(b) != self.algebra.size:
            raise UAError("partition has the wrong length")
        if not self._trusted and not _is_compatible(self.algebra, b):
            raise UAError("partition is not compatible with the operations")

    @classmethod
    def identity(cls, A: FiniteAlgebra) -> "Congruence":
        return cls(A, tuple(range(A.size)), _trusted=True)

    @classmethod
    def total(cls, A: FiniteAlgebra) -> "Congruence":
        return cls(A, (0,) * A.size, _trusted=True)

    def __eq__(self, other):
        return isinstance(other, Congruence) and self.blocks == other.blocks

    def __hash__(self):
        return hash(self.blocks)

    def __le__(self, other: "Congruence") -> bool:
        return all(other.blocks[a] == other.blocks[b] for a, b in enumerate(self.blocks))

    def related(self, a: int, b: int) -> bool:
        return self.blocks[a] == self.blocks[b]

    def num_blocks(self) -> int:
        return len(set(self.blocks))

    def classes(self) -> list[list[int]]:
        groups: dict[int, list[int]] = {}
        for a, b in enumerate(self.blocks):
            groups.setdefault(b, []).append(a)
        return [groups[k] for k in sorted(groups)]

    def is_identity(self) -> bool:
        return self.blocks == tuple(range(len(self.blocks)))

    def is_total(self) -> bool:
        return all(b == 0 for b in self.blocks)

    def join(self, other: "Congruence") -> "Congruence":
        uf = _UnionFind(len(self.blocks))
        for a in range(len(self.blocks)):
            uf.union(a, self.blocks[a])
            uf.union(a, other.blocks[a])
        return Congruence(self.algebra, uf.canonical(), _trusted=True)

    def meet(self, other: "Congruence") -> "Congruence":
        labels = [self.blocks[a] * len(self.blocks) + other.blocks[a] for a in range(len(self.blocks))]
        return Congruence(self.algebra, labels, _trusted=True)


def _is_compatible(A: FiniteAlgebra, blocks: Sequence[int]) -> bool:
    b = np.asarray(blocks, dtype=np.int64)
    for op, k in A.sig.ops:
        digits = tuple_digits(A.size, k)
        base = b[A.table(op)]
        for i in range(k):
            moved = list(digits)
            moved[i] = b[digits[i]]
            if not np.array_equal(base, b[A.table(op)[combine(moved, A.size)]]):
                return False
    return True


def congruence_generated(A: FiniteAlgebra, pairs: Iterable[tuple[int, int]]) -> Congruence:
    """Least congruence containing ``pairs`` (union-find plus a worklist).

    Every pair that actually merges two classes goes on the worklist; for it
    and every basic translation (one operation, one argument position, any
    fixed values elsewhere) the two images are merged in turn.
    """
    uf = _UnionFind(A.size)
    work = []
    for a, b in pairs:
        if uf.union(int(a), int(b)):
            work.append((int(a), int(b)))
    nd = [(A.table_nd(op), k) for op, k in A.sig.ops if k > 0]
    while work:
        a, b = work.pop()
        for T, k in nd:
            for i in range(k):
                xs = np.take(T, a, axis=i).ravel()
                ys = np.take(T, b, axis=i).ravel()
                diff = xs != ys
                for x, y in zip(xs[diff].tolist(), ys[diff].tolist()):
                    if uf.union(x, y):
                        work.append((x, y))
    return Congruence(A, uf.canonical(), _trusted=True)


def principal_congruences(A: FiniteAlgebra) -> dict[tuple[int, int], Congruence]:
    return {
        (a, b): congruence_generated(A, [(a, b)])
        for a in range(A.size)
        for b in range(a + 1, A.size)
    }


def all_congruences(A: FiniteAlgebra, cap: int = 100_000) -> list[Congruence]:
    """Every congruence, as the join-closure of the principal congruences."""
    principals = list(dict.fromkeys(principal_congruences(A).values()))
    found = {Congruence.identity(A)}
    frontier = list(found)
    while frontier:
        nxt = []
        for c in frontier:
            for p in principals:
                j = c.join(p)
                if j not in found:
                    found.add(j)
                    nxt.append(j)
                    if len(found) > cap:
                        raise CapExceeded(f"more than {cap} congruences", found=len(found))
        frontier = nxt
    return sorted(found, key=lambda c: (-c.num_blocks(), c.blocks))


def quotient(A: FiniteAlgebra, theta: Congruence) -> tuple[FiniteAlgebra, Homomorphism]:
    reps = sorted(set(theta.blocks))
    pos = {r: i for i, r in enumerate(reps)}
    proj = np.asarray([pos[theta.blocks[a]] for a in range(A.size)], dtype=np.int64)
    reps_arr = np.asarray(reps, dtype=np.int64)
    m = len(reps)
    tables = {}
    for op, k in A.sig.ops:
        digits = tuple_digits(m, k)
        tables[op] = proj[A.table(op)[combine([reps_arr[d] for d in digits], A.size)]]
    Q = FiniteAlgebra(A.sig, m, tables, name=f"{A.name}/~")
    return Q, Homomorphism(A, Q, tuple(proj.tolist()))


def kernel(h: Homomorphism) -> Congruence:
    return Congruence(h.dom, h.map, _trusted=True)


def monolith(A: FiniteAlgebra) -> Congruence | None:
    """Meet of all non-identity congruences, or None if it is the identity."""
    if A.size < 2:
        return None
    m = Congruence.total(A)
    for c in principal_congruences(A).values():
        m = m.meet(c)
        if m.is_identity():
            return None
    return m


def is_subdirectly_irreducible(A: FiniteAlgebra) -> bool:
    if A.size < 2:
        raise UAError("subdirect irreducibility needs at least two elements")
    return monolith(A) is not None


# -- relations -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Relation:
    """A subuniverse of ``left x right``."""

    left: FiniteAlgebra
    right: FiniteAlgebra
    pairs: frozenset

    def __post_init__(self):
        _same_sig(self.left, self.right)
        pairs = frozenset((int(a), int(b)) for a, b in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        if not pairs:
            raise UAError("empty relation")
        L, R = self.left, self.right
        ids = {a + L.size * b for a, b in pairs}
        if len(ids) != len(pairs) or any(
            a >= L.size or b >= R.size for a, b in pairs
        ):
            raise UAError("relation leaves its carriers")
        xs = np.asarray([a for a, _ in sorted(pairs)], dtype=np.int64)
        ys = np.asarray([b for _, b in sorted(pairs)], dtype=np.int64)
        for op, k in L.sig.ops:
            digits = tuple_digits(len(xs), k)
            rx = L.table(op)[combine([xs[d] for d in digits], L.size)]
            ry = R.table(op)[combine([ys[d] for d in digits], R.size)]
            for a, b in zip(rx.tolist(), ry.tolist()):
                if (a, b) not in pairs:
                    raise UAError(f"relation is not closed under {op}")

    def __eq__(self, other):
        return isinstance(other, Relation) and self.pairs == other.pairs

    def __hash__(self):
        return hash(self.pairs)

    def __contains__(self, pair) -> bool:
        return tuple(pair) in self.pairs


@dataclass(frozen=True)
class RelationFlags:
    reflexive: bool
    symmetric: bool
    transitive: bool
    difunctional: bool

    @property
    def equivalence(self) -> bool:
        return self.reflexive and self.symmetric and self.transitive

    def as_dict(self) -> dict[str, bool]:
        return {
            "reflexive": self.reflexive,
            "symmetric": self.symmetric,
            "transitive": self.transitive,
            "difunctional": self.difunctional,
            "equivalence": self.equivalence,
        }


def relation_properties(R: Relation) -> RelationFlags:
    if R.left != R.right:
        raise UAError("relation properties need left == right")
    pairs = R.pairs
    n = R.left.size
    by_left: dict[int, set[int]] = {}
    by_right: dict[int, set[int]] = {}
    for a, b in pairs:
        by_left.setdefault(a, set()).add(b)
        by_right.setdefault(b, set()).add(a)
    reflexive = all((a, a) in pairs for a in range(n))
    symmetric = all((b, a) in pairs for a, b in pairs)
    transitive = all(
        (a, c) in pairs for a, b in pairs for c in by_left.get(b, ())
    )
    # xRy, x'Ry, x'Ry'  =>  xRy'
    difunctional = all(
        (x, y2) in pairs
        for x, y in pairs
        for x2 in by_right[y]
        for y2 in by_left[x2]
    )
    return RelationFlags(reflexive, symmetric, transitive, difunctional)


def enumerate_reflexive_relations(A: FiniteAlgebra, cap: int = 10_000) -> list[Relation]:
    """All subuniverses of ``A x A`` containing the diagonal."""
    n = A.size
    A2 = product(A, A)
    start = closure(A2, [a + n * a for a in range(n)])
    found = {start}
    queue = [start]
    while queue:
        s = queue.pop()
        for p in range(A2.size):
            if p not in s:
                t = closure(A2, s | {p})
                if t not in found:
                    found.add(t)
                    queue.append(t)
                    if len(found) > cap:
                        raise CapExceeded(f"more than {cap} reflexive relations", found=len(found))
    ordered = sorted(found, key=lambda s: (len(s), sorted(s)))
    return [Relation(A, A, frozenset((e % n, e // n) for e in s)) for s in ordered]


# -- pullbacks of split epimorphisms -------------------------------------------


@dataclass(frozen=True)
class Pullback:
    algebra: FiniteAlgebra
    pairs: tuple[tuple[int, int], ...]
    p1: Homomorphism
    p2: Homomorphism
    e1: Homomorphism
    e2: Homomorphism


def pullback_split_epis(
    f: Homomorphism, r: Homomorphism, g: Homomorphism, s: Homomorphism
) -> Pullback:
    """Pullback of split epis ``f: X -> Z`` (split by ``r``) and ``g: Y -> Z`` (by ``s``)."""
    X, Z, Y = f.dom, f.cod, g.dom
    if g.cod != Z or r.dom != Z or r.cod != X or s.dom != Z or s.cod != Y:
        raise UAError("maps do not form a pair of split epimorphisms over one object")
    if f.compose(r).map != tuple(range(Z.size)) or g.compose(s).map != tuple(range(Z.size)):
        raise UAError("splitting equations f r = 1 = g s fail")
    XY = product(X, Y)
    elems = sorted(x + X.size * y for y in range(Y.size) for x in range(X.size) if f(x) == g(y))
    P = restrict(XY, elems, name="pullback")
    pos = {e: i for i, e in enumerate(elems)}
    pairs = tuple((e % X.size, e // X.size) for e in elems)
    p1 = Homomorphism(P, X, tuple(a for a, _ in pairs))
    p2 = Homomorphism(P, Y, tuple(b for _, b in pairs))
    e1 = Homomorphism(X, P, tuple(pos[x + X.size * s(f(x))] for x in range(X.size)))
    e2 = Homomorphism(Y, P, tuple(pos[r(g(y)) + X.size * y] for y in range(Y.size)))
    return Pullback(P, pairs, p1, p2, e1, e2)


def jointly_surjective(e1: Homomorphism, e2: Homomorphism) -> bool:
    """Whether the images of ``e1`` and ``e2`` generate their common codomain."""
    if e1.cod != e2.cod:
        raise UAError("maps have different codomains")
    return len(closure(e1.cod, set(e1.map) | set(e2.map))) == e1.cod.size
