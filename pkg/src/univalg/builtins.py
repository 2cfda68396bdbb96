"""Built-in algebras and witness bundles, available by name."""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .algebra import FiniteAlgebra
from .errors import InputError
from .terms import Signature

LATTICE_SIG = Signature.of(("meet", 2), ("join", 2))
Z2_SIG = Signature.of(("xor", 2), ("zero", 0))


def lattice_from_order(n: int, leq: set[tuple[int, int]], name: str) -> FiniteAlgebra:
    """Lattice on ``0..n-1`` from its order relation (reflexive pairs are added)."""
    leq = set(leq) | {(a, a) for a in range(n)}

    def extremum(a, b, lower):
        if lower:
            cands = [c for c in range(n) if (c, a) in leq and (c, b) in leq]
            best = [c for c in cands if all((d, c) in leq for d in cands)]
        else:
            cands = [c for c in range(n) if (a, c) in leq and (b, c) in leq]
            best = [c for c in cands if all((c, d) in leq for d in cands)]
        if len(best) != 1:
            raise InputError(f"{name}: order is not a lattice at ({a}, {b})")
        return best[0]

    # table index a + n*b holds op(a, b)
    meet = [extremum(a, b, True) for b in range(n) for a in range(n)]
    join = [extremum(a, b, False) for b in range(n) for a in range(n)]
    return FiniteAlgebra(LATTICE_SIG, n, {"meet": meet, "join": join}, name=name)


def _bounded(n: int, covers: list[tuple[int, int]]) -> set[tuple[int, int]]:
    leq = {(a, a) for a in range(n)} | set(covers)
    changed = True
    while changed:
        extra = {(a, d) for a, b in leq for c, d in leq if b == c} - leq
        changed = bool(extra)
        leq |= extra
    return leq


def lattice2() -> FiniteAlgebra:
    return lattice_from_order(2, {(0, 1)}, "lattice2")


def n5() -> FiniteAlgebra:
    # 0 < 1 < 2 < 4 and 0 < 3 < 4
    return lattice_from_order(5, _bounded(5, [(0, 1), (1, 2), (2, 4), (0, 3), (3, 4)]), "n5")


def m3() -> FiniteAlgebra:
    return lattice_from_order(
        5, _bounded(5, [(0, 1), (0, 2), (0, 3), (1, 4), (2, 4), (3, 4)]), "m3"
    )


def z2xor() -> FiniteAlgebra:
    return FiniteAlgebra(Z2_SIG, 2, {"xor": [0, 1, 1, 0], "zero": [0]}, name="z2xor")


def set2() -> FiniteAlgebra:
    return FiniteAlgebra(Signature(()), 2, {}, name="set2")


ALGEBRAS = {
    "lattice2": lattice2,
    "n5": n5,
    "m3": m3,
    "z2xor": z2xor,
    "set2": set2,
}

BUNDLES = {
    "dl-example-3-6": "distributive-lattice.json",
    "distributive-lattice": "distributive-lattice.json",
}


def load_algebra(source: str) -> FiniteAlgebra:
    """A builtin by name, or an algebra JSON file."""
    if source in ALGEBRAS:
        return ALGEBRAS[source]()
    path = Path(source)
    if not path.is_file():
        raise InputError(
            f"unknown algebra {source!r}: not a builtin ({', '.join(ALGEBRAS)}) or a file"
        )
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"{source}: invalid JSON: {exc}") from None
    return FiniteAlgebra.from_json(data)


def bundle_json(source: str) -> dict:
    """Raw bundle JSON for a builtin name or a file path."""
    if source in BUNDLES:
        text = resources.files("univalg").joinpath("data", BUNDLES[source]).read_text("utf-8")
    else:
        path = Path(source)
        if not path.is_file():
            raise InputError(f"unknown witness bundle {source!r}")
        text = path.read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{source}: invalid JSON: {exc}") from None


def load_bundle(source: str, sig: Signature):
    from .witness import WitnessBundle

    return WitnessBundle.from_json(bundle_json(source), sig)
