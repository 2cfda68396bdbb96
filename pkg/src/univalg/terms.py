"""Signatures, terms over positional variables, and their evaluation.

Terms use the s-expression syntax ``(op arg ...)`` with variables written
``$0``, ``$1``, ...  Constants may be written bare (``zero``) or applied to
nothing (``(zero)``).

Every table and term function is indexed with the same convention: an
assignment ``(a_0, ..., a_{w-1})`` over a carrier of size ``n`` lives at
index ``a_0 + n*a_1 + ... + n**(w-1) * a_{w-1}``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import InputError, TermParseError

_NAME_RE = re.compile(r"[a-zA-Z][a-zA-Z0-9_]*\Z")


@dataclass(frozen=True)
class Signature:
    ops: tuple[tuple[str, int], ...]

    def __post_init__(self):
        seen = set()
        for name, arity in self.ops:
            if not isinstance(name, str) or not _NAME_RE.match(name):
                raise InputError(f"invalid operation name {name!r}")
            if name in seen:
                raise InputError(f"duplicate operation name {name!r}")
            if not isinstance(arity, int) or arity < 0:
                raise InputError(f"invalid arity {arity!r} for {name!r}")
            seen.add(name)

    @classmethod
    def of(cls, *ops: tuple[str, int]) -> "Signature":
        return cls(tuple((n, a) for n, a in ops))

    @property
    def names(self) -> list[str]:
        return [n for n, _ in self.ops]

    def arity(self, name: str) -> int:
        for n, a in self.ops:
            if n == name:
                return a
        raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return any(n == name for n, _ in self.ops)

    def has_constant(self) -> bool:
        return any(a == 0 for _, a in self.ops)


@dataclass(frozen=True)
class Var:
    index: int

    def __str__(self):
        return f"${self.index}"


@dataclass(frozen=True)
class App:
    op: str
    args: tuple["Term", ...] = ()

    def __str__(self):
        return render_term(self)


Term = Union[Var, App]


@dataclass(frozen=True)
class Identity:
    lhs: Term
    rhs: Term
    width: int

    def __post_init__(self):
        if max(max_var(self.lhs), max_var(self.rhs)) >= self.width:
            raise InputError("identity uses a variable outside its width")

    def __str__(self):
        return f"{render_term(self.lhs)} = {render_term(self.rhs)}"


def var(i: int) -> Var:
    return Var(i)


def app(op: str, *args: Term) -> App:
    return App(op, tuple(args))


def max_var(t: Term) -> int:
    """Largest variable index occurring in ``t``, or -1 for ground terms."""
    if isinstance(t, Var):
        return t.index
    return max((max_var(a) for a in t.args), default=-1)


def term_size(t: Term) -> int:
    if isinstance(t, Var):
        return 1
    return 1 + sum(term_size(a) for a in t.args)


def check_term(t: Term, sig: Signature, width: int | None = None) -> None:
    """Raise InputError unless ``t`` is well formed over ``sig``."""
    if isinstance(t, Var):
        if t.index < 0:
            raise InputError(f"negative variable index in {t}")
        if width is not None and t.index >= width:
            raise InputError(f"variable ${t.index} exceeds width {width}")
        return
    if t.op not in sig:
        raise InputError(f"unknown operation {t.op!r}")
    if len(t.args) != sig.arity(t.op):
        raise InputError(
            f"{t.op!r} expects {sig.arity(t.op)} arguments, got {len(t.args)}"
        )
    for a in t.args:
        check_term(a, sig, width)


# -- parsing -----------------------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(?:(\()|(\))|\$(\d+)|([a-zA-Z][a-zA-Z0-9_]*)|(\S))")


def _tokens(text: str):
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            break
        start = m.end() - len(m.group(0).lstrip())
        byte_off = len(text[:start].encode("utf-8"))
        if m.group(1):
            yield "(", None, byte_off
        elif m.group(2):
            yield ")", None, byte_off
        elif m.group(3) is not None:
            yield "var", int(m.group(3)), byte_off
        elif m.group(4):
            yield "name", m.group(4), byte_off
        else:
            raise TermParseError(f"unexpected character {m.group(5)!r}", byte_off)
        pos = m.end()


def parse_term(text: str, sig: Signature) -> Term:
    """Parse an s-expression into a Term, checking names and arities."""
    toks = list(_tokens(text))
    end_off = len(text.encode("utf-8"))
    pos = 0

    def parse() -> Term:
        nonlocal pos
        if pos >= len(toks):
            raise TermParseError("unexpected end of input", end_off)
        kind, val, off = toks[pos]
        pos += 1
        if kind == "var":
            return Var(val)
        if kind == "name":
            if val not in sig:
                raise TermParseError(f"unknown operation {val!r}", off)
            if sig.arity(val) != 0:
                raise TermParseError(
                    f"arity mismatch: {val!r} expects {sig.arity(val)} arguments, got 0",
                    off,
                )
            return App(val, ())
        if kind == ")":
            raise TermParseError("unexpected ')'", off)
        # kind == "("
        if pos >= len(toks):
            raise TermParseError("unexpected end of input", end_off)
        kind, name, name_off = toks[pos]
        if kind != "name":
            raise TermParseError("expected operation name after '('", name_off)
        if name not in sig:
            raise TermParseError(f"unknown operation {name!r}", name_off)
        pos += 1
        args = []
        while True:
            if pos >= len(toks):
                raise TermParseError("unclosed '('", off)
            if toks[pos][0] == ")":
                pos += 1
                break
            args.append(parse())
        if len(args) != sig.arity(name):
            raise TermParseError(
                f"arity mismatch: {name!r} expects {sig.arity(name)} arguments, "
                f"got {len(args)}",
                name_off,
            )
        return App(name, tuple(args))

    t = parse()
    if pos != len(toks):
        raise TermParseError("trailing input", toks[pos][2])
    return t


def render_term(t: Term) -> str:
    if isinstance(t, Var):
        return f"${t.index}"
    if not t.args:
        return t.op
    return "(" + " ".join([t.op] + [render_term(a) for a in t.args]) + ")"


# -- substitution and evaluation -------------------------------------------


def substitute(t: Term, args: Sequence[Term]) -> Term:
    """Simultaneously replace ``$i`` by ``args[i]``."""
    if isinstance(t, Var):
        if t.index >= len(args):
            raise IndexError(f"variable ${t.index} has no substitute")
        return args[t.index]
    return App(t.op, tuple(substitute(a, args) for a in t.args))


def _radix_index(values, n: int) -> int:
    idx = 0
    for v in reversed(values):
        idx = idx * n + v
    return idx


def eval_term(t: Term, A, assignment: Sequence[int]) -> int:
    """Evaluate ``t`` in the finite algebra ``A`` at ``assignment``."""
    if isinstance(t, Var):
        if t.index >= len(assignment):
            raise IndexError(f"assignment too short for ${t.index}")
        return assignment[t.index]
    vals = [eval_term(a, A, assignment) for a in t.args]
    return int(A.table(t.op)[_radix_index(vals, A.size)])


def projection_vector(i: int, n: int, width: int) -> np.ndarray:
    idx = np.arange(n**width, dtype=np.int64)
    return (idx // n**i) % n


def term_function(t: Term, A, width: int) -> np.ndarray:
    """Value vector of ``t`` over all ``A.size**width`` assignments."""
    if max_var(t) >= width:
        raise IndexError(f"term uses ${max_var(t)} but width is {width}")
    n = A.size
    total = n**width
    cache: dict[Term, np.ndarray] = {}

    def go(s: Term) -> np.ndarray:
        hit = cache.get(s)
        if hit is not None:
            return hit
        if isinstance(s, Var):
            out = projection_vector(s.index, n, width)
        else:
            table = A.table(s.op)
            if not s.args:
                out = np.full(total, table[0], dtype=np.int64)
            else:
                combined = np.zeros(total, dtype=np.int64)
                for j, a in enumerate(s.args):
                    combined += go(a) * n**j
                out = table[combined].astype(np.int64)
        cache[s] = out
        return out

    return go(t)
