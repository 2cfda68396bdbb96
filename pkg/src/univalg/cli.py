"""The ``ua`` command line tool.

Exit codes: 0 yes/success, 1 no/negative, 2 unknown, 3 resource cap, 4 input error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .algebra import (
    FiniteAlgebra,
    congruence_generated,
    enumerate_reflexive_relations,
    hom_enumerate,
    relation_properties,
)
from .builtins import ALGEBRAS, BUNDLES, load_algebra, load_bundle
from .errors import CapExceeded, InputError, LimitExceeded, NotCongruenceDistributive, UAError
from .maltsev import (
    SeparationCertificate,
    Verdict,
    build_core,
    check_certificate,
    maltsev_term,
    reg_maltsev,
    weakly_maltsev,
)
from .terms import render_term
from .variety import VarietyPresentation, coproduct, free_algebra
from .witness import verify_witness

EXIT_YES, EXIT_NO, EXIT_UNKNOWN, EXIT_CAP, EXIT_INPUT = 0, 1, 2, 3, 4
_VERDICT_EXIT = {"yes": EXIT_YES, "no": EXIT_NO, "unknown": EXIT_UNKNOWN}


def _variety(args) -> VarietyPresentation:
    A = load_algebra(args.algebra)
    caps = {}
    if args.max_free_size is not None:
        caps["max_free_size"] = args.max_free_size
    if getattr(args, "max_power", None) is not None:
        caps["max_power"] = args.max_power
    return VarietyPresentation(A, **caps)


def _emit(args, text: str, data: dict) -> None:
    if args.json:
        print(json.dumps(data, indent=2, sort_keys=False))
    else:
        print(text)


def cmd_free(args) -> int:
    V = _variety(args)
    F = free_algebra(V, args.gens)
    lines = [f"|F({args.gens})| = {F.size}"]
    if args.list:
        lines += [f"  {i}: {render_term(w)}" for i, w in enumerate(F.witnesses)]
    _emit(args, "\n".join(lines), F.to_json())
    return EXIT_YES


def cmd_maltsev(args) -> int:
    V = _variety(args)
    p = maltsev_term(V)
    text = render_term(p) if p is not None else "none"
    _emit(args, text, {"maltsev_term": None if p is None else render_term(p)})
    return EXIT_YES if p is not None else EXIT_NO


def _verdict_text(v: Verdict) -> str:
    lines = [v.status.upper(), f"  {v.justification}"]
    if v.bound is not None:
        lines.append(f"  exhausted up to power {v.bound}")
    cert = v.certificate
    if cert is not None:
        lines.append(
            f"  certificate: S of size {cert.S.size} from A^{cert.power}, "
            f"u(target)={cert.u[cert.target]}, v(target)={cert.v[cert.target]}"
        )
    return "\n".join(lines)


def _run_decision(args, decide) -> int:
    V = _variety(args)
    core = build_core(V)
    verdict = decide(V, mode=args.mode, max_power=args.max_power, core=core)
    if verdict.certificate is not None:
        check = check_certificate(verdict.certificate, core)
        if not check:
            raise UAError(f"internal error: certificate fails its own check ({check.violation})")
        if args.certificate:
            Path(args.certificate).write_text(
                json.dumps(verdict.certificate.to_json(), indent=2) + "\n", encoding="utf-8"
            )
    _emit(args, _verdict_text(verdict), verdict.to_json())
    return _VERDICT_EXIT[verdict.status]


def cmd_weakly_maltsev(args) -> int:
    return _run_decision(args, weakly_maltsev)


def cmd_reg_maltsev(args) -> int:
    return _run_decision(args, reg_maltsev)


def cmd_check_certificate(args) -> int:
    V = _variety(args)
    try:
        data = json.loads(Path(args.file).read_text(encoding="utf-8"))
        if "certificate" in data:
            data = data["certificate"]
        cert = SeparationCertificate.from_json(data)
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"cannot read certificate: {exc}") from None
    check = check_certificate(cert, build_core(V))
    text = "valid" if check else f"invalid: {check.violation}"
    _emit(args, text, {"valid": check.ok, "violation": check.violation})
    return EXIT_YES if check else EXIT_NO


def cmd_verify_witness(args) -> int:
    V = _variety(args)
    bundle = load_bundle(args.witness, V.sig)
    report = verify_witness(V, bundle, args.theorem)
    lines = []
    for r in report.results:
        if r.ok:
            if args.verbose:
                lines.append(f"PASS {r.id}")
        else:
            cex = ", ".join(f"{k}={v}" for k, v in r.counterexample.items())
            lines.append(f"FAIL {r.id}: {r.identity}  at {cex}")
    summary = "PASS" if report.ok else "FAIL"
    lines.append(
        f"{summary}: {len(report.results) - len(report.failures)}/{len(report.results)} "
        f"equations hold (theorem={args.theorem}, k={bundle.k}, m={bundle.m}, N={bundle.N})"
    )
    _emit(args, "\n".join(lines), report.to_json())
    return EXIT_YES if report.ok else EXIT_NO


def cmd_coproduct(args) -> int:
    V = _variety(args)
    B, C = load_algebra(args.left), load_algebra(args.right)
    cop = coproduct(V, B, C)
    text = (
        f"|{B.name or 'B'} + {C.name or 'C'}| = {cop.algebra.size}\n"
        f"  iota1 = {list(cop.iota1.map)}\n  iota2 = {list(cop.iota2.map)}"
    )
    data = {
        "size": cop.algebra.size,
        "algebra": cop.algebra.to_json(),
        "iota1": list(cop.iota1.map),
        "iota2": list(cop.iota2.map),
    }
    _emit(args, text, data)
    return EXIT_YES


def _parse_pairs(text: str, size: int) -> list[tuple[int, int]]:
    try:
        nums = [int(t) for t in text.replace(",", " ").replace(";", " ").split()]
    except ValueError:
        raise InputError(f"--pairs must be whitespace-separated integers, got {text!r}") from None
    if len(nums) % 2:
        raise InputError("--pairs needs an even number of elements")
    if any(not 0 <= a < size for a in nums):
        raise InputError(f"pair element outside the carrier 0..{size - 1}")
    return list(zip(nums[::2], nums[1::2]))


def cmd_congruence(args) -> int:
    A = load_algebra(args.algebra)
    theta = congruence_generated(A, _parse_pairs(args.pairs or "", A.size))
    classes = theta.classes()
    text = f"{len(classes)} block(s): " + " ".join(
        "{" + ",".join(map(str, c)) + "}" for c in classes
    )
    _emit(args, text, {"blocks": list(theta.blocks), "num_blocks": len(classes)})
    return EXIT_YES


def cmd_relations(args) -> int:
    A = load_algebra(args.algebra)
    rels = enumerate_reflexive_relations(A)
    lines = [f"{len(rels)} reflexive compatible relation(s)"]
    data = []
    for R in rels:
        flags = relation_properties(R).as_dict()
        pairs = sorted(R.pairs)
        data.append({"pairs": [list(p) for p in pairs], "flags": flags})
        on = [k for k, v in flags.items() if v]
        lines.append(f"  {pairs}: {', '.join(on) or '-'}")
    _emit(args, "\n".join(lines), {"count": len(rels), "relations": data})
    return EXIT_YES


def cmd_homs(args) -> int:
    A = load_algebra(args.algebra)
    B = load_algebra(args.target) if args.target else A
    homs = hom_enumerate(A, B, limit=args.limit)
    lines = [f"{len(homs)} homomorphism(s)"] + [f"  {list(h.map)}" for h in homs]
    _emit(args, "\n".join(lines), {"count": len(homs), "maps": [list(h.map) for h in homs]})
    return EXIT_YES


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ua",
        description="Free algebras, congruences and Mal'tsev-type properties of HSP(A).",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, algebra=True):
        p = sub.add_parser(name, help=help_text)
        if algebra:
            p.add_argument(
                "--algebra", required=True,
                help=f"builtin ({', '.join(ALGEBRAS)}) or algebra JSON file",
            )
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument("--max-free-size", type=int, default=None,
                       help="cap on free-algebra size (env UA_MAX_FREE_SIZE)")
        p.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
        p.set_defaults(func=func)
        return p

    p = add("free", cmd_free, "size and elements of a free algebra")
    p.add_argument("--gens", type=int, required=True)
    p.add_argument("--list", action="store_true", help="print witness terms")

    add("maltsev", cmd_maltsev, "find a Mal'tsev term")

    for name, func, text in (
        ("weakly-maltsev", cmd_weakly_maltsev, "decide the weakly Mal'tsev property"),
        ("reg-maltsev", cmd_reg_maltsev, "decide the regular-relation Mal'tsev property"),
    ):
        p = add(name, func, text)
        p.add_argument("--mode", choices=["cd", "refute"], default="cd")
        p.add_argument("--max-power", type=int, default=None)
        p.add_argument("--certificate", metavar="PATH", help="write a No certificate here")

    p = add("check-certificate", cmd_check_certificate, "re-verify a separation certificate")
    p.add_argument("file")

    p = add("verify-witness", cmd_verify_witness, "verify a witness bundle")
    p.add_argument("--witness", required=True,
                   help=f"builtin ({', '.join(BUNDLES)}) or bundle JSON file")
    p.add_argument("--theorem", choices=["wm", "reg"], default="wm")

    p = add("coproduct", cmd_coproduct, "coproduct of two algebras in the variety")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)

    p = add("congruence", cmd_congruence, "congruence generated by pairs")
    p.add_argument("--pairs", default="", help='flat list, e.g. "0 1 2 3"')

    add("relations", cmd_relations, "reflexive compatible relations and their properties")

    p = add("homs", cmd_homs, "enumerate homomorphisms")
    p.add_argument("--target", default=None, help="codomain (defaults to the algebra)")
    p.add_argument("--limit", type=int, default=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "max_free_size", None) is not None and args.max_free_size < 1:
        print("error: --max-free-size must be positive", file=sys.stderr)
        return EXIT_INPUT
    if getattr(args, "max_power", None) is not None and args.max_power < 1:
        print("error: --max-power must be positive", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except (CapExceeded, LimitExceeded) as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (InputError, NotCongruenceDistributive) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except UAError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
