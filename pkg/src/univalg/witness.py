"""Witness bundles certifying weak Mal'tsevness, and their verifier.

A bundle consists of integers ``k, m, N`` and terms

* ``f, g``: k binary terms each;
* ``p``: m ternary terms;
* ``s``: N terms of width ``2(k+2m+1)`` over ``(u, v, w, w~, u', v', w', w~')``;
* ``sigma``: N+1 terms of width ``2(k+m+2)`` over ``(u, v, w, u', v', w', a, b)``;
* ``eta1, eta2, eps1, eps2``: N+1 terms each of width ``k+m+1`` over ``(u, v, w)``.

Here ``v`` stands for k variables and ``w`` for m variables.  Equation ids
in reports are ``diag[i]``, ``eta-y[i,a]``, ``eta-x[i,a]``, ``odd[i]``,
``even[i]``, ``start`` and ``end`` with 1-based indices.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InputError
from .terms import Identity, Signature, Term, Var, check_term, parse_term, render_term, substitute
from .variety import VarietyPresentation, find_counterexample


class BundleFormatError(InputError):
    pass


_TERM_FIELDS = ("f", "g", "p", "s", "sigma", "eta1", "eta2", "eps1", "eps2")


@dataclass
class WitnessBundle:
    k: int
    m: int
    N: int
    f: list[Term]
    g: list[Term]
    p: list[Term]
    s: list[Term]
    sigma: list[Term]
    eta1: list[Term]
    eta2: list[Term]
    eps1: list[Term]
    eps2: list[Term]
    comment: str = ""

    def expected_shape(self) -> dict[str, tuple[int, int]]:
        """Field name -> (count, width)."""
        k, m, N = self.k, self.m, self.N
        short = k + m + 1
        return {
            "f": (k, 2),
            "g": (k, 2),
            "p": (m, 3),
            "s": (N, 2 * (k + 2 * m + 1)),
            "sigma": (N + 1, 2 * (k + m + 2)),
            "eta1": (N + 1, short),
            "eta2": (N + 1, short),
            "eps1": (N + 1, short),
            "eps2": (N + 1, short),
        }

    def validate(self, sig: Signature | None = None) -> None:
        for name, val in (("k", self.k), ("m", self.m), ("N", self.N)):
            if not isinstance(val, int) or val < 0:
                raise BundleFormatError(f"{name} must be a non-negative integer")
        for name, (count, width) in self.expected_shape().items():
            terms = getattr(self, name)
            if len(terms) != count:
                raise BundleFormatError(f"{name}: expected {count} terms, got {len(terms)}")
            for i, t in enumerate(terms):
                try:
                    check_term(t, sig, width) if sig is not None else _check_width(t, width)
                except InputError as exc:
                    raise BundleFormatError(f"{name}[{i + 1}]: {exc}") from None

    @classmethod
    def from_json(cls, data: dict, sig: Signature) -> "WitnessBundle":
        try:
            k, m, N = data["k"], data["m"], data["N"]
            parsed = {}
            for name in _TERM_FIELDS:
                raw = data.get(name, [])
                if not isinstance(raw, list):
                    raise BundleFormatError(f"{name} must be a list of s-expressions")
                parsed[name] = [parse_term(t, sig) for t in raw]
        except KeyError as exc:
            raise BundleFormatError(f"missing field {exc.args[0]!r}") from None
        except InputError as exc:
            if isinstance(exc, BundleFormatError):
                raise
            raise BundleFormatError(str(exc)) from None
        bundle = cls(k, m, N, comment=data.get("comment", ""), **parsed)
        bundle.validate(sig)
        return bundle

    def to_json(self) -> dict:
        out = {"k": self.k, "m": self.m, "N": self.N}
        for name in _TERM_FIELDS:
            out[name] = [render_term(t) for t in getattr(self, name)]
        if self.comment:
            out["comment"] = self.comment
        return out

    def replace(self, field_name: str, index: int, term: Term) -> "WitnessBundle":
        """Copy with one term swapped out (index is 0-based)."""
        terms = list(getattr(self, field_name))
        terms[index] = term
        data = {name: list(getattr(self, name)) for name in _TERM_FIELDS}
        data[field_name] = terms
        return WitnessBundle(self.k, self.m, self.N, comment=self.comment, **data)


def _check_width(t: Term, width: int) -> None:
    if isinstance(t, Var):
        if not 0 <= t.index < width:
            raise InputError(f"variable ${t.index} exceeds width {width}")
        return
    for a in t.args:
        _check_width(a, width)


@dataclass
class EquationResult:
    id: str
    identity: Identity
    ok: bool
    counterexample: dict[str, int] | None = None

    def to_json(self) -> dict:
        out = {"id": self.id, "ok": self.ok, "lhs": render_term(self.identity.lhs),
               "rhs": render_term(self.identity.rhs)}
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample
        return out


@dataclass
class WitnessReport:
    theorem: str
    results: list[EquationResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)

    @property
    def failures(self) -> list[EquationResult]:
        return [r for r in self.results if not r.ok]

    def __bool__(self):
        return self.ok

    def to_json(self) -> dict:
        return {
            "theorem": self.theorem,
            "ok": self.ok,
            "checked": len(self.results),
            "failed": len(self.failures),
            "equations": [r.to_json() for r in self.results],
        }


def _wide_names(k: int, m: int) -> list[str]:
    side = ["u"] + [f"v{j}" for j in range(1, k + 1)] + [f"w{j}" for j in range(1, m + 1)]
    return side + [n + "'" for n in side]


def bundle_identities(bundle: WitnessBundle, theorem: str = "wm") -> list[tuple[str, Identity, list[str]]]:
    """Every identity the bundle must satisfy, as ``(id, identity, variable names)``."""
    if theorem not in ("wm", "reg"):
        raise InputError(f"unknown theorem {theorem!r}; expected 'wm' or 'reg'")
    k, m, N = bundle.k, bundle.m, bundle.N
    out = []
    x, y = Var(0), Var(1)
    xy_names = ["x", "y"]

    if theorem == "wm":
        for i in range(k):
            out.append((
                f"diag[{i + 1}]",
                Identity(substitute(bundle.f[i], [x, x]), substitute(bundle.g[i], [x, x]), 2),
                xy_names,
            ))

    # (y, f(x,y), p(x,x,y)) and (x, g(x,y), p(x,y,y))
    at_y = [y] + list(bundle.f) + [substitute(p, [x, x, y]) for p in bundle.p]
    at_x = [x] + list(bundle.g) + [substitute(p, [x, y, y]) for p in bundle.p]
    for i in range(N + 1):
        for alpha, (eta, eps) in enumerate(
            ((bundle.eta1[i], bundle.eps1[i]), (bundle.eta2[i], bundle.eps2[i])), start=1
        ):
            out.append((
                f"eta-y[{i + 1},{alpha}]",
                Identity(substitute(eta, at_y), substitute(eps, at_y), 2),
                xy_names,
            ))
            out.append((
                f"eta-x[{i + 1},{alpha}]",
                Identity(substitute(eta, at_x), substitute(eps, at_x), 2),
                xy_names,
            ))

    side = k + m + 1
    width = 2 * side
    names = _wide_names(k, m)
    L = [Var(j) for j in range(side)]
    R = [Var(side + j) for j in range(side)]
    W = [Var(1 + k + j) for j in range(m)]
    Wp = [Var(side + 1 + k + j) for j in range(m)]
    UV, UVp = L[: 1 + k], R[: 1 + k]

    def sigma_at(i: int, left: Term, right: Term) -> Term:
        return substitute(bundle.sigma[i], L + R + [left, right])

    for i in range(N):
        odd_lhs = sigma_at(i, substitute(bundle.eps1[i], L), substitute(bundle.eps2[i], R))
        odd_rhs = substitute(bundle.s[i], UV + W + W + UVp + Wp + Wp)
        out.append((f"odd[{i + 1}]", Identity(odd_lhs, odd_rhs, width), names))
        even_lhs = substitute(bundle.s[i], UV + W + Wp + UVp + Wp + W)
        even_rhs = sigma_at(
            i + 1, substitute(bundle.eta1[i + 1], L), substitute(bundle.eta2[i + 1], R)
        )
        out.append((f"even[{i + 1}]", Identity(even_lhs, even_rhs, width), names))

    start_rhs = sigma_at(0, substitute(bundle.eta1[0], L), substitute(bundle.eta2[0], R))
    out.append(("start", Identity(L[0], start_rhs, width), names))
    end_rhs = sigma_at(N, substitute(bundle.eps1[N], L), substitute(bundle.eps2[N], R))
    out.append(("end", Identity(R[0], end_rhs, width), names))
    return out


def verify_witness(V: VarietyPresentation, bundle: WitnessBundle, theorem: str = "wm") -> WitnessReport:
    """Check every identity of the bundle in the variety."""
    bundle.validate(V.sig)
    report = WitnessReport(theorem)
    for eq_id, ident, names in bundle_identities(bundle, theorem):
        cex = find_counterexample(V, ident)
        if cex is None:
            report.results.append(EquationResult(eq_id, ident, True))
        else:
            report.results.append(EquationResult(eq_id, ident, False, dict(zip(names, cex))))
    return report


def maltsev_bundle(p: Term) -> WitnessBundle:
    """The k=0, m=1, N=1 bundle built from a Mal'tsev term ``p``."""
    u, w = Var(0), Var(1)
    return WitnessBundle(
        k=0, m=1, N=1,
        f=[], g=[], p=[p],
        s=[Var(2)],
        sigma=[Var(4), Var(5)],
        eta1=[u, u],
        eta2=[u, w],
        eps1=[w, u],
        eps2=[u, u],
        comment="built from a Mal'tsev term",
    )

