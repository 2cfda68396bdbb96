"""Acceptance criteria, one test each.

Every test tags itself with a ``criterion`` property; conftest prints one
PASS/FAIL line per criterion at the end of the run.
"""

import dataclasses
import itertools
import time

import numpy as np

import test_maltsev
import test_terms
import test_witness
from oracles import least_congruence_naive, term_functions_by_depth
from univalg import (
    VarietyPresentation,
    build_core,
    check_certificate,
    congruence_generated,
    coproduct,
    couniversal_factor,
    free_algebra,
    hom_enumerate,
    holds_identity,
    load_algebra,
    load_bundle,
    maltsev_term,
    parse_term,
    power,
    product,
    reg_maltsev,
    verify_witness,
    weakly_maltsev,
    zigzag_step_relation,
)
from univalg.algebra import trivial_algebra
from univalg.terms import Identity, Var, substitute, term_function
from univalg.variety import transitive_closure_partition
from univalg.witness import bundle_identities


def tag(record_property, text):
    record_property("criterion", text)


def test_c1_distributive_lattice_bundle(record_property):
    tag(record_property, "1 distributive-lattice witness bundle verifies; sigma1 mutation fails")
    start = time.perf_counter()
    V = VarietyPresentation(load_algebra("lattice2"))
    bundle = load_bundle("dl-example-3-6", V.sig)
    assert (bundle.k, bundle.m, bundle.N) == (0, 3, 5)
    report = verify_witness(V, bundle, "wm")
    elapsed = time.perf_counter() - start
    assert report.ok, [f.id for f in report.failures]
    assert all(2 ** ident.width <= 256 for _, ident, _ in bundle_identities(bundle))
    assert elapsed < 1.0, f"took {elapsed:.3f}s"

    mutated = bundle.replace("sigma", 0, parse_term("(meet $0 $9)", V.sig))
    bad = verify_witness(V, mutated, "wm")
    assert not bad.ok
    assert "start" in {f.id for f in bad.failures}
    assert all(f.counterexample for f in bad.failures)


def test_c2_decision_trio(record_property):
    tag(record_property, "2 weakly_maltsev: lattice2 cd = yes, n5 cd = no (checked), set2 refute(1) = no")
    cases = [("lattice2", "cd", None, "yes"), ("n5", "cd", None, "no"), ("set2", "refute", 1, "no")]
    for name, mode, max_power, expected in cases:
        start = time.perf_counter()
        V = VarietyPresentation(load_algebra(name))
        core = build_core(V)
        verdict = weakly_maltsev(V, mode, max_power, core=core)
        elapsed = time.perf_counter() - start
        assert verdict.status == expected, name
        if expected == "no":
            assert check_certificate(verdict.certificate, core)
        assert elapsed < 10.0, f"{name} took {elapsed:.3f}s"


def test_c3_maltsev_detection(record_property):
    tag(record_property, "3 Mal'tsev term for z2xor is x+y+z; none for lattice2; reg_maltsev(lattice2) = yes")
    Z = VarietyPresentation(load_algebra("z2xor"))
    p = maltsev_term(Z)
    assert p is not None
    x, y = Var(0), Var(1)
    assert holds_identity(Z, Identity(substitute(p, [x, x, y]), y, 2))
    assert holds_identity(Z, Identity(substitute(p, [x, y, y]), x, 2))
    idx = np.arange(8)
    xor3 = (idx & 1) ^ ((idx >> 1) & 1) ^ ((idx >> 2) & 1)
    assert term_function(p, Z.generator, 3).tolist() == xor3.tolist()

    L = VarietyPresentation(load_algebra("lattice2"))
    assert maltsev_term(L) is None
    assert reg_maltsev(L, "cd").status == "yes"


def test_c4_free_algebra_sizes(record_property):
    tag(record_property, "4 |F(n)| = 1,4,18 over lattice2 and 2^n over z2xor, matching a depth-6 oracle")
    lattice2, z2 = load_algebra("lattice2"), load_algebra("z2xor")
    L, Z = VarietyPresentation(lattice2), VarietyPresentation(z2)
    for n, size in zip((1, 2, 3), (1, 4, 18)):
        F = free_algebra(L, n)
        oracle = term_functions_by_depth(lattice2, n, 6)
        assert F.size == size == len(oracle)
        assert {tuple(map(int, row)) for row in F.vectors} == oracle
    for n in (1, 2, 3, 4):
        F = free_algebra(Z, n)
        oracle = term_functions_by_depth(z2, n, 6)
        assert F.size == 2**n == len(oracle)
        assert {tuple(map(int, row)) for row in F.vectors} == oracle


def congruence_corpus():
    lattice2, z2, set2 = (load_algebra(n) for n in ("lattice2", "z2xor", "set2"))
    L = VarietyPresentation(lattice2)
    return [
        lattice2,
        z2,
        set2,
        product(lattice2, lattice2),
        product(z2, z2),
        product(set2, set2),
        free_algebra(L, 2).algebra,
        trivial_algebra(lattice2.sig),
    ]


def test_c5_congruence_oracle(record_property):
    tag(record_property, "5 congruence_generated equals the least congruence containing each seed pair")
    for A in congruence_corpus():
        assert A.size <= 4
        for a, b in itertools.product(range(A.size), repeat=2):
            assert congruence_generated(A, [(a, b)]).blocks == least_congruence_naive(A, [(a, b)])


def test_c6_coproduct_universal_property(record_property):
    tag(record_property, "6 Z2 + Z2 has 4 elements and factors every hom pair uniquely")
    z2 = load_algebra("z2xor")
    Z = VarietyPresentation(z2)
    cop = coproduct(Z, z2, z2)
    assert cop.algebra.size == 4
    for D in (z2, power(z2, 2)):
        out = hom_enumerate(cop.algebra, D)
        for f, g in itertools.product(hom_enumerate(z2, D), repeat=2):
            phi = couniversal_factor(Z, cop, f, g)
            matches = [h for h in out if h.compose(cop.iota1) == f and h.compose(cop.iota2) == g]
            assert matches == [phi]


def test_c7_zigzag_closure(record_property):
    tag(record_property, "7 transitive closure of the one-step relation equals the table congruence")
    z2 = load_algebra("z2xor")
    Z = VarietyPresentation(z2)
    cop = coproduct(Z, z2, z2)
    sim = zigzag_step_relation(Z, z2, z2)
    assert transitive_closure_partition(cop.free.size, sim) == cop.congruence.blocks


def test_c8_property_suites(record_property):
    tag(record_property, "8 substitution law, certificate checks, N=0 property, refute monotonicity in < 60 s")
    start = time.perf_counter()
    test_terms.test_substitution_evaluation_law()
    test_terms.test_parse_render_roundtrip()
    test_witness.test_n0_bundle_forces_x_equals_y()
    for name in ("set2", "n5", "m3"):
        test_maltsev.test_refute_is_monotone(name)
        test_maltsev.test_certificates_pass_naive_checks(name)
    V = VarietyPresentation(load_algebra("n5"))
    core = build_core(V)
    cert = weakly_maltsev(V, "cd", core=core).certificate
    assert check_certificate(cert, core)
    assert not check_certificate(dataclasses.replace(cert, v=cert.u), core)
    elapsed = time.perf_counter() - start
    assert elapsed < 60.0, f"took {elapsed:.1f}s"
