"""Finitely generated varieties HSP(A): free algebras and colimits.

A free algebra ``F(n)`` is the subalgebra of ``A**(A**n)`` generated by the
``n`` projections.  Each element is a term function on the generator,
stored as a value vector over all ``|A|**n`` assignments, together with the
first witness term found for it.
"""

from __future__ import annotations

import itertools
import json
import os
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .algebra import (
    Congruence,
    FiniteAlgebra,
    Homomorphism,
    bfs_closure,
    combine,
    congruence_generated,
    product,
    quotient,
    tuple_digits,
)
from .errors import CapExceeded, InputError, UAError
from .terms import Identity, Term, eval_term, projection_vector, render_term, term_function

DEFAULT_MAX_FREE_SIZE = 1_000_000
DEFAULT_MAX_POWER = 4


def _default_free_cap() -> int:
    env = os.environ.get("UA_MAX_FREE_SIZE")
    if env:
        try:
            return int(env)
        except ValueError:
            raise InputError(f"UA_MAX_FREE_SIZE must be an integer, got {env!r}")
    return DEFAULT_MAX_FREE_SIZE


@dataclass(eq=False)
class VarietyPresentation:
    generator: FiniteAlgebra
    max_free_size: int = field(default_factory=_default_free_cap)
    max_power: int = DEFAULT_MAX_POWER
    _free_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.max_free_size < 1 or self.max_power < 1:
            raise InputError("caps must be positive")

    @classmethod
    def of(cls, *generators: FiniteAlgebra, **caps) -> "VarietyPresentation":
        """HSP of several algebras, presented by their product."""
        return cls(reduce(product, generators), **caps)

    @property
    def sig(self):
        return self.generator.sig

    @property
    def name(self) -> str:
        return self.generator.name


@dataclass(eq=False)
class FreeAlgebra:
    n: int
    base: FiniteAlgebra
    vectors: np.ndarray
    witnesses: list[Term]
    generator_ids: list[int]
    _index: dict = field(default_factory=dict, repr=False)
    _algebra: FiniteAlgebra | None = field(default=None, repr=False)

    def __post_init__(self):
        if not self._index:
            self._index = {row.tobytes(): i for i, row in enumerate(self.vectors)}

    @property
    def size(self) -> int:
        return len(self.vectors)

    def index_of_vector(self, vec) -> int:
        return self._index[np.asarray(vec, dtype=self.vectors.dtype).tobytes()]

    def element_of_term(self, t: Term) -> int:
        return self.index_of_vector(term_function(t, self.base, self.n))

    def evaluate(self, element: int, B: FiniteAlgebra, assignment) -> int:
        """Evaluate the term function of ``element`` in ``B`` via its witness."""
        return eval_term(self.witnesses[element], B, assignment)

    def substitute_elements(self, element: int, args) -> int:
        """``element(args[0], ..., args[n-1])`` computed inside F(n)."""
        a = self.base.size
        cols = combine([self.vectors[g].astype(np.int64) for g in args], a)
        return self.index_of_vector(self.vectors[element][cols])

    @property
    def algebra(self) -> FiniteAlgebra:
        """F(n) as a finite algebra on ``0..size-1`` (tables built lazily)."""
        if self._algebra is None:
            self._algebra = self._build_algebra()
        return self._algebra

    def _build_algebra(self) -> FiniteAlgebra:
        s = self.size
        a = self.base.size
        vecs = self.vectors.astype(np.int64)
        tables = {}
        for op, k in self.base.sig.ops:
            out = np.empty(s**k, dtype=np.int64)
            total = s**k
            chunk = max(1, (1 << 22) // max(1, vecs.shape[1]))
            for lo in range(0, total, chunk):
                idx = np.arange(lo, min(total, lo + chunk), dtype=np.int64)
                digits = tuple_digits(s, k, idx)
                if k == 0:
                    res = np.broadcast_to(self.base.table(op)[0], (1, vecs.shape[1]))
                else:
                    res = self.base.table(op)[combine([vecs[d] for d in digits], a)]
                res = res.astype(self.vectors.dtype)
                out[lo : lo + len(idx)] = [self._index[row.tobytes()] for row in res]
            tables[op] = out
        return FiniteAlgebra(self.base.sig, s, tables, name=f"F{self.n}({self.base.name})")

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "size": self.size,
            "witnesses": [render_term(w) for w in self.witnesses],
        }


def free_algebra(V: VarietyPresentation, n: int) -> FreeAlgebra:
    key = n
    if key in V._free_cache:
        return V._free_cache[key]
    A = V.generator
    if n == 0 and not A.sig.has_constant():
        raise UAError("F(0) is empty for a signature without constants")
    a = A.size
    width = a**n
    dtype = np.uint8 if a <= 256 else np.uint32
    seeds = []
    for j in range(n):
        v = projection_vector(j, a, n).astype(dtype)
        seeds.append(v.tobytes())

    cache = {"mat": np.zeros((0, width), dtype=np.int64)}

    def matrix(elements):
        mat = cache["mat"]
        if len(mat) < len(elements):
            extra = [np.frombuffer(e, dtype=dtype) for e in elements[len(mat):]]
            mat = np.vstack([mat, np.stack(extra).astype(np.int64)])
            cache["mat"] = mat
        return mat

    def apply(op, elements, digits):
        table = A.table(op)
        if digits.shape[0] == 0:
            return [np.full(width, table[0], dtype=dtype).tobytes()]
        mat = matrix(elements)
        out = []
        chunk = max(1, (1 << 21) // max(1, width))
        for lo in range(0, digits.shape[1], chunk):
            part = digits[:, lo : lo + chunk]
            res = table[combine([mat[d] for d in part], a)].astype(dtype)
            out.extend(row.tobytes() for row in res)
        return out

    elements, witnesses = bfs_closure(
        seeds, A.sig, apply, cap=V.max_free_size, what=f"free algebra F({n})"
    )
    vectors = np.stack([np.frombuffer(e, dtype=dtype) for e in elements])
    index = {e: i for i, e in enumerate(elements)}
    gen_ids = [index[s] for s in seeds]
    F = FreeAlgebra(n, A, vectors, witnesses, gen_ids, _index=index)
    V._free_cache[key] = F
    return F


def find_counterexample(V: VarietyPresentation, ident: Identity):
    """First assignment (as a tuple) where the two sides differ, or None."""
    A = V.generator
    lhs = term_function(ident.lhs, A, ident.width)
    rhs = term_function(ident.rhs, A, ident.width)
    bad = np.nonzero(lhs != rhs)[0]
    if bad.size == 0:
        return None
    idx = int(bad[0])
    return tuple((idx // A.size**j) % A.size for j in range(ident.width))


def holds_identity(V: VarietyPresentation, ident: Identity) -> bool:
    return find_counterexample(V, ident) is None


def is_member(V: VarietyPresentation, B: FiniteAlgebra, width: int = 3) -> bool:
    """Whether ``B`` satisfies every identity of the generator in ``width`` variables.

    Equivalently, every map from the free generators into ``B`` extends to a
    homomorphism ``F(width) -> B``.
    """
    if B.sig != V.sig:
        return False
    F = free_algebra(V, width)
    FA = F.algebra
    for assignment in itertools.product(range(B.size), repeat=width):
        h = np.asarray([F.evaluate(e, B, assignment) for e in range(F.size)], dtype=np.int64)
        for op, k in FA.sig.ops:
            digits = tuple_digits(FA.size, k)
            if not np.array_equal(h[FA.table(op)], B.table(op)[combine([h[d] for d in digits], B.size)]):
                return False
    return True


# -- colimits ------------------------------------------------------------------


@dataclass(eq=False)
class Coproduct:
    algebra: FiniteAlgebra
    iota1: Homomorphism
    iota2: Homomorphism
    free: FreeAlgebra
    congruence: Congruence
    projection: Homomorphism
    left: FiniteAlgebra
    right: FiniteAlgebra


def coproduct(
    V: VarietyPresentation,
    B: FiniteAlgebra,
    C: FiniteAlgebra,
    check_membership: bool = True,
) -> Coproduct:
    """``B + C`` in V as ``F(|B|+|C|)`` modulo the operation-table congruence."""
    if B.sig != V.sig or C.sig != V.sig:
        raise InputError("algebras do not share the variety's signature")
    if check_membership:
        for X in (B, C):
            if not is_member(V, X):
                raise UAError(f"{X.name or 'algebra'} fails an identity of the variety")
    nb = B.size
    F = free_algebra(V, B.size + C.size)
    FA = F.algebra
    gens = F.generator_ids
    pairs = []
    for X, offset in ((B, 0), (C, nb)):
        for op, k in V.sig.ops:
            for idx, val in enumerate(X.table(op).tolist()):
                args = [(idx // X.size**j) % X.size for j in range(k)]
                lhs = gens[offset + val]
                rhs = FA.apply(op, *[gens[offset + a] for a in args])
                pairs.append((lhs, rhs))
    theta = congruence_generated(FA, pairs)
    Q, proj = quotient(FA, theta)
    Q.name = f"{B.name or 'B'}+{C.name or 'C'}"
    iota1 = Homomorphism(B, Q, tuple(proj(gens[b]) for b in range(nb)))
    iota2 = Homomorphism(C, Q, tuple(proj(gens[nb + c]) for c in range(C.size)))
    return Coproduct(Q, iota1, iota2, F, theta, proj, B, C)


def couniversal_factor(
    V: VarietyPresentation, cop: Coproduct, f: Homomorphism, g: Homomorphism
) -> Homomorphism:
    """The unique ``phi`` with ``phi iota1 = f`` and ``phi iota2 = g``."""
    if f.cod != g.cod:
        raise UAError("f and g must share a codomain")
    if f.dom != cop.left or g.dom != cop.right:
        raise UAError("f and g must start at the coproduct summands")
    D = f.cod
    assignment = list(f.map) + list(g.map)
    reps = sorted(set(cop.congruence.blocks))
    phi = Homomorphism(cop.algebra, D, tuple(cop.free.evaluate(r, D, assignment) for r in reps))
    if phi.compose(cop.iota1) != f or phi.compose(cop.iota2) != g:
        raise UAError("factorisation does not commute; an input is outside the variety")
    return phi


def coequalizer(
    V: VarietyPresentation, f: Homomorphism, g: Homomorphism
) -> tuple[FiniteAlgebra, Homomorphism]:
    if f.dom != g.dom or f.cod != g.cod:
        raise UAError("coequalizer needs a parallel pair")
    theta = congruence_generated(f.cod, [(f(b), g(b)) for b in range(f.dom.size)])
    return quotient(f.cod, theta)


@dataclass(eq=False)
class CokernelPair:
    algebra: FiniteAlgebra
    q1: Homomorphism
    q2: Homomorphism
    coproduct: Coproduct
    q: Homomorphism


def cokernel_pair(V: VarietyPresentation, m: Homomorphism) -> CokernelPair:
    C = m.cod
    cop = coproduct(V, C, C)
    Q, q = coequalizer(V, cop.iota1.compose(m), cop.iota2.compose(m))
    return CokernelPair(Q, q.compose(cop.iota1), q.compose(cop.iota2), cop, q)


def zigzag_step_relation(
    V: VarietyPresentation, B: FiniteAlgebra, C: FiniteAlgebra, size_guard: int = 256
) -> set[tuple[int, int]]:
    """The one-step relation on ``F(|B|+|C|)`` whose transitive closure is the
    coproduct congruence.

    Pairs have the form ``(tau(a, b, mu1(a), mu2(b)), tau(a, b, lam1(a), lam2(b)))``
    with ``mu1(a) = lam1(a)`` in B and ``mu2(b) = lam2(b)`` in C.  The tuples
    ``a`` and ``b`` run over all of B and C: any shorter repetition-free
    tuple is covered because the terms may ignore variables.
    """
    nb, nc = B.size, C.size
    n = nb + nc
    F = free_algebra(V, n)
    if F.size > size_guard:
        raise CapExceeded(f"F({n}) has {F.size} elements (guard {size_guard})", found=F.size)
    a = V.generator.size
    FB, FC = free_algebra(V, nb), free_algebra(V, nc)
    Ftau = free_algebra(V, n + 2)

    def agreeing(Fk: FreeAlgebra, X: FiniteAlgebra):
        vals = [Fk.evaluate(e, X, list(range(X.size))) for e in range(Fk.size)]
        return [(i, j) for i in range(Fk.size) for j in range(Fk.size) if vals[i] == vals[j]]

    pairs_b = agreeing(FB, B)
    pairs_c = agreeing(FC, C)

    idx = np.arange(a**n, dtype=np.int64)
    low = idx % a**nb
    high = idx // a**nb
    tau = Ftau.vectors.astype(np.int64)
    images: dict[tuple[int, int], np.ndarray] = {}

    def image(m1: int, m2: int) -> np.ndarray:
        key = (m1, m2)
        if key not in images:
            v1 = FB.vectors[m1].astype(np.int64)[low]
            v2 = FC.vectors[m2].astype(np.int64)[high]
            cols = idx + a**n * v1 + a ** (n + 1) * v2
            res = tau[:, cols].astype(F.vectors.dtype)
            images[key] = np.asarray([F._index[row.tobytes()] for row in res])
        return images[key]

    out: set[tuple[int, int]] = set()
    for mu1, lam1 in pairs_b:
        for mu2, lam2 in pairs_c:
            left = image(mu1, mu2)
            right = image(lam1, lam2)
            out.update(zip(left.tolist(), right.tolist()))
    return out


def transitive_closure_partition(size: int, pairs) -> tuple[int, ...]:
    """Block ids (least member) of the equivalence generated by ``pairs``."""
    parent = list(range(size))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for x, y in pairs:
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[max(rx, ry)] = min(rx, ry)
    return tuple(find(x) for x in range(size))
