"""Mal'tsev-type decisions for a variety HSP(A).

Everything revolves around a few objects built from the free algebra
``F(x, y)``:

* ``P``: pairs ``(t1, t2)`` of binary term functions with ``t1(x,x) = t2(x,x)``;
* ``R``: the subalgebra of ``F(x,y)^2`` generated by ``(x,x), (x,y), (y,y)``,
  i.e. all ``(p(x,x,y), p(x,y,y))`` for ternary ``p``;
* ``e1, e2: F(x,y) -> P`` with ``e1(t) = (t, t(y,y))`` and ``e2(t) = (t(x,x), t)``.

The variety has a Mal'tsev term iff ``(y,x)`` lies in ``R``.  It is weakly
Mal'tsev iff any two homomorphisms out of ``P`` that agree on ``R`` also
agree on ``(y,x)``; the regular variant asks the same with ``F(x,y)^2`` as
the ambient algebra.  Those are dominion questions, answered by searching
for a separating pair of homomorphisms into a subdirectly irreducible
member of the variety.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .algebra import (
    Congruence,
    FiniteAlgebra,
    Homomorphism,
    all_congruences,
    closure,
    enumerate_subuniverses,
    generating_set,
    is_homomorphism,
    iter_hom_maps,
    monolith,
    power,
    product,
    quotient,
    restrict,
    subalgebra_generate,
)
from .errors import CapExceeded, NotCongruenceDistributive, UAError
from .terms import Identity, Term, Var, render_term, substitute
from .variety import FreeAlgebra, VarietyPresentation, free_algebra, holds_identity

log = logging.getLogger(__name__)

# Search limits for the dominion search.
MAX_POWER_ELEMENTS = 4096
MAX_SUBUNIVERSES = 20_000
MAX_CONGRUENCES = 20_000


@dataclass(eq=False)
class CoreObjects:
    variety: VarietyPresentation
    F2: FreeAlgebra
    F2sq: FiniteAlgebra
    P_elements: list[int]
    P: FiniteAlgebra
    R_elements: list[int]
    R_witnesses: list[Term]
    R_gens: list[int]
    yx: int
    e1: Homomorphism
    e2: Homomorphism

    @property
    def x(self) -> int:
        return self.F2.generator_ids[0]

    @property
    def y(self) -> int:
        return self.F2.generator_ids[1]

    def pair(self, t1: int, t2: int) -> int:
        """F2sq element for the pair ``(t1, t2)``."""
        return t1 + self.F2.size * t2

    def unpair(self, e: int) -> tuple[int, int]:
        return e % self.F2.size, e // self.F2.size

    def in_R(self, e: int) -> bool:
        return e in self._R_set

    def p_index(self, e: int) -> int:
        return self._P_pos[e]

    def __post_init__(self):
        self._R_set = set(self.R_elements)
        self._P_pos = {e: i for i, e in enumerate(self.P_elements)}

    def ambient(self, which: str) -> tuple[FiniteAlgebra, list[int], list[int], int]:
        """(ambient algebra, R as ambient ids, R generators, target) for ``P`` or ``F2sq``."""
        if which == "P":
            return (
                self.P,
                [self._P_pos[e] for e in self.R_elements],
                [self._P_pos[e] for e in self.R_gens],
                self._P_pos[self.yx],
            )
        if which == "F2sq":
            return self.F2sq, list(self.R_elements), list(self.R_gens), self.yx
        raise ValueError(f"unknown ambient {which!r}")


def build_core(V: VarietyPresentation) -> CoreObjects:
    F = free_algebra(V, 2)
    FA = F.algebra
    s = F.size
    a = V.generator.size
    x, y = F.generator_ids
    F2sq = product(FA, FA)
    F2sq.name = "F(x,y)^2"

    diag_cols = np.arange(a) * (1 + a)
    diag = [F.vectors[t][diag_cols].tobytes() for t in range(s)]
    P_elements = sorted(
        t1 + s * t2 for t2 in range(s) for t1 in range(s) if diag[t1] == diag[t2]
    )
    P = restrict(F2sq, P_elements, name="P")
    pos = {e: i for i, e in enumerate(P_elements)}

    R_gens = [x + s * x, x + s * y, y + s * y]
    R_elements, R_witnesses = subalgebra_generate(F2sq, R_gens)
    yx = y + s * x

    e1 = Homomorphism(
        FA, P, tuple(pos[t + s * F.substitute_elements(t, [y, y])] for t in range(s))
    )
    e2 = Homomorphism(
        FA, P, tuple(pos[F.substitute_elements(t, [x, x]) + s * t] for t in range(s))
    )
    core = CoreObjects(V, F, F2sq, P_elements, P, R_elements, R_witnesses, R_gens, yx, e1, e2)

    # structural invariants
    if not set(R_elements) <= set(P_elements):
        raise UAError("R is not contained in P")
    if yx not in pos:
        raise UAError("(y,x) is not in P")
    if (e1(x), e1(y), e2(x), e2(y)) != (
        pos[x + s * y], pos[y + s * y], pos[x + s * x], pos[x + s * y]
    ):
        raise UAError("pullback injections have the wrong generator images")
    image = closure(P, set(e1.map) | set(e2.map))
    if {P_elements[i] for i in image} != set(R_elements):
        raise UAError("R differs from the image of [e1, e2]")
    return core


def maltsev_term(V: VarietyPresentation, core: CoreObjects | None = None) -> Term | None:
    """A ternary term ``p`` with ``p(x,x,y) = y`` and ``p(x,y,y) = x``, if any."""
    core = core or build_core(V)
    if not core.in_R(core.yx):
        return None
    p = core.R_witnesses[core.R_elements.index(core.yx)]
    x, y = Var(0), Var(1)
    ok = holds_identity(V, Identity(substitute(p, [x, x, y]), y, 2)) and holds_identity(
        V, Identity(substitute(p, [x, y, y]), x, 2)
    )
    if not ok:
        raise UAError(f"witness {render_term(p)} fails the Mal'tsev identities")
    return p


# -- congruence distributivity -------------------------------------------------


def jonsson_chain(V: VarietyPresentation) -> list[Term] | None:
    """Shortest chain ``x = d0, d1, ..., dn = z`` of Jonsson terms, or None.

    All ``d_i`` satisfy ``d_i(x,y,x) = x``; consecutive terms agree after
    substituting ``(x,x,y)`` when ``i`` is even and ``(x,y,y)`` when odd.
    """
    F = free_algebra(V, 3)
    a = V.generator.size
    p, q = np.meshgrid(np.arange(a), np.arange(a), indexing="ij")
    p, q = p.ravel(order="F"), q.ravel(order="F")  # p is the fast index

    def cols(c0, c1, c2):
        return c0 + a * c1 + a * a * c2

    xyx = cols(p, q, p)
    xxy = cols(p, p, q)
    xyy = cols(p, q, q)
    x, _, z = F.generator_ids
    vec = F.vectors
    target_xyx = vec[x][xyx].tobytes()
    allowed = [e for e in range(F.size) if vec[e][xyx].tobytes() == target_xyx]
    groups: list[dict[bytes, list[int]]] = [{}, {}]
    keys: list[dict[int, bytes]] = [{}, {}]
    for e in allowed:
        for par, c in ((0, xxy), (1, xyy)):
            k = vec[e][c].tobytes()
            keys[par][e] = k
            groups[par].setdefault(k, []).append(e)
    start = (x, 0)
    parent = {start: None}
    queue = deque([start])
    while queue:
        e, par = queue.popleft()
        if e == z:
            chain = []
            node = (e, par)
            while node is not None:
                chain.append(F.witnesses[node[0]])
                node = parent[node]
            return chain[::-1]
        for nxt in groups[par][keys[par][e]]:
            node = (nxt, 1 - par)
            if node not in parent:
                parent[node] = (e, par)
                queue.append(node)
    return None


def cd_certify(V: VarietyPresentation) -> bool:
    return jonsson_chain(V) is not None


# -- verdicts and certificates -------------------------------------------------


@dataclass
class SeparationCertificate:
    S: FiniteAlgebra
    power: int
    subalgebra: tuple[int, ...]
    congruence: tuple[int, ...]
    u: tuple[int, ...]
    v: tuple[int, ...]
    target: int
    ambient: str = "P"

    def to_json(self) -> dict:
        return {
            "ambient": self.ambient,
            "S": self.S.to_json(),
            "provenance": {
                "power": self.power,
                "subalgebra": list(self.subalgebra),
                "congruence": list(self.congruence),
            },
            "u": list(self.u),
            "v": list(self.v),
            "target": self.target,
        }

    @classmethod
    def from_json(cls, data: dict) -> "SeparationCertificate":
        prov = data["provenance"]
        return cls(
            S=FiniteAlgebra.from_json(data["S"]),
            power=int(prov["power"]),
            subalgebra=tuple(prov["subalgebra"]),
            congruence=tuple(prov["congruence"]),
            u=tuple(data["u"]),
            v=tuple(data["v"]),
            target=int(data["target"]),
            ambient=data.get("ambient", "P"),
        )


@dataclass
class Verdict:
    status: str  # "yes", "no" or "unknown"
    justification: str = ""
    certificate: SeparationCertificate | None = None
    bound: int | None = None

    @property
    def is_yes(self) -> bool:
        return self.status == "yes"

    @property
    def is_no(self) -> bool:
        return self.status == "no"

    def to_json(self) -> dict:
        out = {"verdict": self.status, "justification": self.justification}
        if self.bound is not None:
            out["bound"] = self.bound
        if self.certificate is not None:
            out["certificate"] = self.certificate.to_json()
        return out


@dataclass
class CertificateCheck:
    ok: bool
    violation: str | None = None

    def __bool__(self):
        return self.ok


def check_separation(
    cert: SeparationCertificate,
    ambient: FiniteAlgebra,
    sub: Sequence[int],
    generator: FiniteAlgebra | None = None,
) -> CertificateCheck:
    """Re-verify a separation certificate from scratch."""
    S = cert.S
    if ambient.sig != S.sig:
        return CertificateCheck(False, "signature mismatch")
    for name, h in (("u", cert.u), ("v", cert.v)):
        if len(h) != ambient.size or any(not 0 <= c < S.size for c in h):
            return CertificateCheck(False, f"{name} has the wrong shape")
        if not is_homomorphism(ambient, S, h):
            return CertificateCheck(False, f"{name} is not a homomorphism")
    for r in sub:
        if cert.u[r] != cert.v[r]:
            return CertificateCheck(False, f"u and v disagree on subalgebra element {r}")
    if not 0 <= cert.target < ambient.size:
        return CertificateCheck(False, "target out of range")
    if cert.u[cert.target] == cert.v[cert.target]:
        return CertificateCheck(False, "u and v agree on the target")
    if generator is not None:
        try:
            Ae = power(generator, cert.power)
            B = restrict(Ae, cert.subalgebra)
            Q, _ = quotient(B, Congruence(B, cert.congruence))
        except UAError as exc:
            return CertificateCheck(False, f"provenance does not rebuild: {exc}")
        if Q != S:
            return CertificateCheck(False, "S differs from its stated provenance")
    if S.size < 2 or monolith(S) is None:
        return CertificateCheck(False, "S is not subdirectly irreducible")
    return CertificateCheck(True)


def check_certificate(cert: SeparationCertificate, core: CoreObjects) -> CertificateCheck:
    try:
        ambient, sub, _, target = core.ambient(cert.ambient)
    except ValueError as exc:
        return CertificateCheck(False, str(exc))
    if cert.target != target:
        return CertificateCheck(False, "target is not (y,x)")
    return check_separation(cert, ambient, sub, core.variety.generator)


# -- dominion search -----------------------------------------------------------


def si_members(A: FiniteAlgebra, e: int):
    """Subdirectly irreducible quotients of subalgebras of ``A**e``.

    Yields ``(subuniverse, congruence, S)``; quotients with identical tables
    are reported once.
    """
    if A.size**e > MAX_POWER_ELEMENTS:
        raise CapExceeded(f"A^{e} has {A.size**e} elements", found=A.size**e)
    Ae = power(A, e)
    seen = set()
    for sub in enumerate_subuniverses(Ae, cap=MAX_SUBUNIVERSES):
        if len(sub) < 2:
            continue
        elems = sorted(sub)
        B = restrict(Ae, elems)
        for theta in all_congruences(B, cap=MAX_CONGRUENCES):
            if theta.is_total():
                continue
            S, _ = quotient(B, theta)
            key = S.key()
            if key in seen or monolith(S) is None:
                continue
            seen.add(key)
            yield tuple(elems), theta, S


def _separate(ambient, sub_gens, gens, target, S):
    groups: dict[tuple, list[tuple[int, ...]]] = {}
    order = []
    for h in iter_hom_maps(ambient, S, gens):
        key = tuple(h[g] for g in sub_gens)
        groups.setdefault(key, []).append(h)
        order.append(h)
    for u in order:
        for v in groups[tuple(u[g] for g in sub_gens)]:
            if u[target] != v[target]:
                return u, v
    return None


def _normalize_mode(mode: str) -> str:
    if mode in ("cd", "cd_complete"):
        return "cd"
    if mode == "refute":
        return "refute"
    raise ValueError(f"unknown mode {mode!r}")


def dominion_member(
    V: VarietyPresentation,
    ambient: FiniteAlgebra,
    sub: Sequence[int],
    target: int,
    mode: str = "cd",
    max_power: int | None = None,
    sub_gens: Sequence[int] | None = None,
    ambient_label: str = "custom",
) -> Verdict:
    """Is ``target`` in the dominion of the subuniverse ``sub`` of ``ambient``?

    ``refute`` mode searches subdirectly irreducible quotients of
    subalgebras of ``A**e`` for ``e <= max_power``: a separating pair is a
    proof of "no", exhaustion gives "unknown".  ``cd`` mode needs a
    congruence-distributive variety, where those members all live in
    ``HS(A)``, so ``e = 1`` is exhaustive and exhaustion means "yes".
    """
    mode = _normalize_mode(mode)
    sub = [int(r) for r in sub]
    if target in set(sub):
        return Verdict("yes", "target lies in the subalgebra itself")
    if sub_gens is None:
        local = generating_set(restrict(ambient, sorted(sub)))
        sub_gens = [sorted(sub)[i] for i in local]
    sub_gens = [int(g) for g in sub_gens]
    gens = generating_set(ambient, start=sub_gens)
    d = max_power or V.max_power
    note = ""
    if mode == "cd":
        try:
            chain = jonsson_chain(V)
        except CapExceeded as exc:
            chain = None
            note = f"CD certification unavailable ({exc}); fell back to refute mode. "
            mode = "refute"
        else:
            if chain is None:
                raise NotCongruenceDistributive(
                    "cd mode requested but the variety has no Jonsson terms"
                )
            d = 1
    for e in range(1, d + 1):
        try:
            for elems, theta, S in si_members(V.generator, e):
                found = _separate(ambient, sub_gens, gens, target, S)
                if found is not None:
                    u, v = found
                    cert = SeparationCertificate(
                        S, e, elems, theta.blocks, u, v, target, ambient_label
                    )
                    return Verdict(
                        "no",
                        note + f"separating pair into a {S.size}-element "
                        f"subdirectly irreducible quotient of a subalgebra of A^{e}",
                        cert,
                    )
        except CapExceeded as exc:
            return Verdict("unknown", note + f"search stopped at power {e}: {exc}", bound=e - 1)
    if mode == "cd":
        return Verdict(
            "yes",
            f"congruence distributive (Jonsson chain of length {len(chain) - 1}); "
            "no separating pair into any subdirectly irreducible member of HS(A)",
        )
    return Verdict("unknown", note + f"no separating pair up to power {d}", bound=d)


def weakly_maltsev(
    V: VarietyPresentation,
    mode: str = "cd",
    max_power: int | None = None,
    core: CoreObjects | None = None,
) -> Verdict:
    core = core or build_core(V)
    ambient, sub, gens, target = core.ambient("P")
    return dominion_member(V, ambient, sub, target, mode, max_power, gens, "P")


def reg_maltsev(
    V: VarietyPresentation,
    mode: str = "cd",
    max_power: int | None = None,
    core: CoreObjects | None = None,
) -> Verdict:
    core = core or build_core(V)
    ambient, sub, gens, target = core.ambient("F2sq")
    return dominion_member(V, ambient, sub, target, mode, max_power, gens, "F2sq")
