import dataclasses
import itertools

import numpy as np
import pytest

from oracles import is_hom_naive
from univalg import (
    Homomorphism,
    SeparationCertificate,
    VarietyPresentation,
    build_core,
    cd_certify,
    check_certificate,
    cokernel_pair,
    couniversal_factor,
    dominion_member,
    free_algebra,
    holds_identity,
    load_algebra,
    maltsev_term,
    power,
    reg_maltsev,
    weakly_maltsev,
)
from univalg import maltsev as maltsev_mod
from univalg.algebra import trivial_algebra
from univalg.errors import NotCongruenceDistributive
from univalg.maltsev import jonsson_chain
from univalg.terms import Identity, Var, substitute, term_function


def V(name, **caps):
    return VarietyPresentation(load_algebra(name), **caps)


# -- core objects ------------------------------------------------------------------


def test_core_lattice(L):
    core = build_core(L)
    assert core.F2.size == 4
    assert len(core.P_elements) == 16


def test_core_set2(S2):
    core = build_core(S2)
    assert core.F2.size == 2
    assert len(core.P_elements) == 4
    x, y = core.x, core.y
    assert set(core.R_elements) == {core.pair(x, x), core.pair(x, y), core.pair(y, y)}


def test_core_z2_is_maltsev(Z):
    core = build_core(Z)
    assert core.in_R(core.yx)


def test_core_pullback_injections(L):
    core = build_core(L)
    x, y = core.x, core.y
    at = core.P_elements
    assert at[core.e1(x)] == core.pair(x, y)
    assert at[core.e1(y)] == core.pair(y, y)
    assert at[core.e2(x)] == core.pair(x, x)
    assert at[core.e2(y)] == core.pair(x, y)


@pytest.mark.parametrize("name", ["lattice2", "z2xor", "set2"])
def test_R_is_the_image_of_ternary_terms(name):
    Vn = V(name)
    core = build_core(Vn)
    F2, F3 = core.F2, free_algebra(Vn, 3)
    x, y = Var(0), Var(1)
    # every element of R is (p(x,x,y), p(x,y,y)) for its witness p
    for r, p in zip(core.R_elements, core.R_witnesses):
        t1, t2 = core.unpair(r)
        assert holds_identity(Vn, Identity(F2.witnesses[t1], substitute(p, [x, x, y]), 2))
        assert holds_identity(Vn, Identity(F2.witnesses[t2], substitute(p, [x, y, y]), 2))
    # and every ternary term lands in R
    pairs = set()
    for p in F3.witnesses:
        t1 = F2.element_of_term(substitute(p, [x, x, y]))
        t2 = F2.element_of_term(substitute(p, [x, y, y]))
        pairs.add(core.pair(t1, t2))
    assert pairs == set(core.R_elements)


# -- Mal'tsev terms ----------------------------------------------------------------


def test_maltsev_term_z2(Z, z2):
    p = maltsev_term(Z)
    assert p is not None
    vec = term_function(p, z2, 3)
    idx = np.arange(8)
    assert vec.tolist() == ((idx & 1) ^ ((idx >> 1) & 1) ^ ((idx >> 2) & 1)).tolist()


def test_maltsev_term_absent(L, S2):
    assert maltsev_term(L) is None
    assert maltsev_term(S2) is None


def test_maltsev_term_trivial_variety(lsig):
    T = VarietyPresentation(trivial_algebra(lsig))
    p = maltsev_term(T)
    assert p is not None
    x, y = Var(0), Var(1)
    assert holds_identity(T, Identity(substitute(p, [x, x, y]), y, 2))


# -- congruence distributivity -------------------------------------------------------


@pytest.mark.parametrize(
    "name, expected", [("lattice2", True), ("n5", True), ("set2", False), ("z2xor", False)]
)
def test_cd_certify(name, expected):
    assert cd_certify(V(name)) is expected


def test_jonsson_chain_satisfies_identities(L):
    chain = jonsson_chain(L)
    x, y, z = Var(0), Var(1), Var(2)
    assert chain[0] == x and chain[-1] == z
    for d in chain:
        assert holds_identity(L, Identity(substitute(d, [x, y, x]), x, 2))
    for i in range(len(chain) - 1):
        sub = [x, x, y] if i % 2 == 0 else [x, y, y]
        lhs, rhs = substitute(chain[i], sub), substitute(chain[i + 1], sub)
        assert holds_identity(L, Identity(lhs, rhs, 2))


# -- decisions -----------------------------------------------------------------------


def test_weakly_maltsev_lattice(L):
    v = weakly_maltsev(L, "cd")
    assert v.status == "yes" and v.certificate is None


def test_weakly_maltsev_n5():
    Vn = V("n5")
    core = build_core(Vn)
    v = weakly_maltsev(Vn, "cd", core=core)
    assert v.status == "no"
    assert check_certificate(v.certificate, core)


def test_weakly_maltsev_set2(S2):
    core = build_core(S2)
    v = weakly_maltsev(S2, "refute", max_power=1, core=core)
    assert v.status == "no"
    cert = v.certificate
    assert cert.S.size == 2 and cert.power == 1
    assert check_certificate(cert, core)


def test_reg_maltsev(L, Z, S2):
    assert reg_maltsev(L, "cd").status == "yes"
    assert reg_maltsev(Z, "cd").status == "yes"
    core = build_core(S2)
    v = reg_maltsev(S2, "refute", max_power=1, core=core)
    assert v.status == "no"
    assert v.certificate.ambient == "F2sq"
    assert check_certificate(v.certificate, core)


def test_maltsev_implies_both_properties(Z):
    assert maltsev_term(Z) is not None
    for mode in ("cd", "refute"):
        assert weakly_maltsev(Z, mode).status == "yes"
        assert reg_maltsev(Z, mode).status == "yes"


def test_cd_mode_requires_distributivity(S2):
    with pytest.raises(NotCongruenceDistributive):
        weakly_maltsev(S2, "cd")


def test_target_in_sub_is_immediate(L):
    core = build_core(L)
    ambient, sub, gens, _ = core.ambient("P")
    v = dominion_member(L, ambient, sub, sub[0], mode="refute")
    assert v.status == "yes"


def test_refute_exhaustion_is_unknown(L):
    v = weakly_maltsev(L, "refute", max_power=2)
    assert v.status == "unknown" and v.bound == 2


def test_power_cap_reports_bound(L, monkeypatch):
    monkeypatch.setattr(maltsev_mod, "MAX_POWER_ELEMENTS", 4)
    v = weakly_maltsev(L, "refute", max_power=4)
    assert v.status == "unknown" and v.bound == 2


def test_cd_falls_back_when_free_cap_hit():
    Vl = V("lattice2", max_free_size=10)
    v = weakly_maltsev(Vl, "cd", max_power=1)
    assert v.status == "unknown"
    assert "fell back" in v.justification


@pytest.mark.parametrize("name", ["set2", "n5", "m3"])
def test_refute_is_monotone(name):
    Vn = V(name)
    core = build_core(Vn)
    verdicts = [weakly_maltsev(Vn, "refute", max_power=d, core=core) for d in (1, 2, 3)]
    first_no = next(i for i, v in enumerate(verdicts) if v.status == "no")
    for v in verdicts[first_no:]:
        assert v.status == "no"
        assert v.certificate.to_json() == verdicts[first_no].certificate.to_json()
        assert check_certificate(v.certificate, core)


@pytest.mark.parametrize("name", ["set2", "n5", "m3"])
def test_certificates_pass_naive_checks(name):
    Vn = V(name)
    core = build_core(Vn)
    cert = weakly_maltsev(Vn, "refute", max_power=1, core=core).certificate
    ambient, sub, _, target = core.ambient("P")
    assert is_hom_naive(ambient, cert.S, cert.u)
    assert is_hom_naive(ambient, cert.S, cert.v)
    assert all(cert.u[r] == cert.v[r] for r in sub)
    assert cert.u[target] != cert.v[target]


# -- certificates --------------------------------------------------------------------


@pytest.fixture(scope="module")
def n5_cert():
    Vn = V("n5")
    core = build_core(Vn)
    return weakly_maltsev(Vn, "cd", core=core).certificate, core


def test_certificate_json_roundtrip(n5_cert):
    cert, core = n5_cert
    again = SeparationCertificate.from_json(cert.to_json())
    assert again.to_json() == cert.to_json()
    assert check_certificate(again, core)


def test_certificate_u_equals_v_rejected(n5_cert):
    cert, core = n5_cert
    bad = dataclasses.replace(cert, v=cert.u)
    check = check_certificate(bad, core)
    assert not check and "agree" in check.violation


def test_certificate_broken_hom_rejected(n5_cert):
    cert, core = n5_cert
    ambient, *_ = core.ambient("P")
    # find an entry whose change breaks a meet equation
    for e in range(ambient.size):
        u = list(cert.u)
        u[e] = (u[e] + 1) % cert.S.size
        bad = dataclasses.replace(cert, u=tuple(u))
        check = check_certificate(bad, core)
        if not check and "homomorphism" in check.violation:
            break
    else:
        pytest.fail("no single-entry change broke the homomorphism property")


def test_certificate_provenance_checked(n5_cert):
    cert, core = n5_cert
    # {0,1,2,3} is not closed under join in n5
    bad = dataclasses.replace(cert, subalgebra=(0, 1, 2, 3))
    check = check_certificate(bad, core)
    assert not check and "provenance" in check.violation
    bad = dataclasses.replace(cert, congruence=(0, 0, 2, 3, 4))
    assert not check_certificate(bad, core)
    # N5 sits inside N5^2 as {(a, 0)}, so this provenance is legitimate
    assert check_certificate(dataclasses.replace(cert, power=2), core)


def test_certificate_wrong_target_rejected(n5_cert):
    cert, core = n5_cert
    assert not check_certificate(dataclasses.replace(cert, target=cert.target ^ 1), core)


# -- cross-check against the cokernel pair -----------------------------------------------


def test_no_certificate_separates_cokernel_pair(Z, z2):
    """A separating pair factors through the cokernel pair and splits q1, q2."""
    Z4 = power(z2, 2)
    diag = Homomorphism(z2, Z4, (0, 3))
    sub = sorted(set(diag.map))
    for target in range(4):
        verdict = dominion_member(Z, Z4, sub, target, mode="refute", max_power=2)
        ck = cokernel_pair(Z, diag)
        if verdict.status == "yes":
            assert ck.q1(target) == ck.q2(target)
            continue
        cert = verdict.certificate
        assert verdict.status == "no"
        u = Homomorphism(Z4, cert.S, cert.u)
        v = Homomorphism(Z4, cert.S, cert.v)
        phi = couniversal_factor(Z, ck.coproduct, u, v)
        # phi is constant on the blocks of the coequalizer
        for a, b in itertools.combinations(range(ck.coproduct.algebra.size), 2):
            if ck.q(a) == ck.q(b):
                assert phi(a) == phi(b)
        assert ck.q1(target) != ck.q2(target)
