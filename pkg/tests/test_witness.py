import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import eval_naive
from univalg import (
    VarietyPresentation,
    load_algebra,
    load_bundle,
    maltsev_bundle,
    maltsev_term,
    parse_term,
    verify_witness,
)
from univalg.algebra import trivial_algebra
from univalg.builtins import bundle_json
from univalg.errors import InputError
from univalg.terms import App, Identity, Var
from univalg.variety import holds_identity
from univalg.witness import BundleFormatError, WitnessBundle, bundle_identities


@pytest.fixture(scope="module")
def dl(lsig):
    return load_bundle("dl-example-3-6", lsig)


def test_builtin_bundle_shape(dl):
    assert (dl.k, dl.m, dl.N) == (0, 3, 5)
    assert len(dl.s) == 5 and len(dl.sigma) == 6


def test_builtin_bundle_terms(dl, lsig):
    assert dl.s[0] == parse_term("(meet $0 (join $6 $4))", lsig)
    assert dl.sigma[0] == parse_term("(meet $0 $8)", lsig)
    assert dl.eta1[0] == parse_term("(join $0 $2)", lsig)
    assert dl.eps1[0] == parse_term("(join $3 $1)", lsig)


def test_builtin_bundle_passes_on_lattice2(L, dl):
    report = verify_witness(L, dl, "wm")
    assert report.ok, [f.id for f in report.failures]
    # no diagonal identities since k = 0; 4 per stage for N+1 stages; 2 per step; start and end
    assert len(report.results) == 4 * 6 + 2 * 5 + 2


def test_identity_widths_are_small(dl):
    for _, ident, names in bundle_identities(dl, "wm"):
        assert 2 ** ident.width <= 256
        assert len(names) == ident.width


def test_sigma_mutation_fails_start(L, dl, lsig):
    bad = dl.replace("sigma", 0, parse_term("(meet $0 $9)", lsig))
    report = verify_witness(L, bad)
    failed = {f.id: f.counterexample for f in report.failures}
    assert "start" in failed
    cex = failed["start"]
    assert cex["u"] == 1


def test_counterexample_really_falsifies(L, dl, lsig):
    bad = dl.replace("s", 2, parse_term("(meet $7 $0)", lsig))
    report = verify_witness(L, bad)
    assert not report.ok
    for f in report.failures:
        env = list(f.counterexample.values())
        A = L.generator
        assert eval_naive(f.identity.lhs, A, env) != eval_naive(f.identity.rhs, A, env)


def test_builtin_bundle_fails_outside_distributive_lattices(dl):
    for name in ("n5", "m3"):
        report = verify_witness(VarietyPresentation(load_algebra(name)), dl)
        assert not report.ok


def test_wm_pass_implies_reg_pass(L, dl):
    wm = verify_witness(L, dl, "wm")
    reg = verify_witness(L, dl, "reg")
    assert wm.ok and reg.ok
    assert {r.id for r in reg.results} <= {r.id for r in wm.results}


def test_diagonal_equations_only_in_wm(L, lsig):
    b = WitnessBundle(
        k=1, m=0, N=0,
        f=[Var(0)], g=[Var(1)], p=[], s=[],
        sigma=[Var(0)], eta1=[Var(0)], eta2=[Var(0)], eps1=[Var(0)], eps2=[Var(0)],
    )
    wm_ids = [eq for eq, _, _ in bundle_identities(b, "wm")]
    reg_ids = [eq for eq, _, _ in bundle_identities(b, "reg")]
    assert "diag[1]" in wm_ids and "diag[1]" not in reg_ids


def test_maltsev_bundle_on_z2(Z):
    bundle = maltsev_bundle(maltsev_term(Z))
    assert verify_witness(Z, bundle, "wm").ok
    assert verify_witness(Z, bundle, "reg").ok


def test_maltsev_bundle_needs_a_maltsev_term(L, lsig):
    bundle = maltsev_bundle(parse_term("(meet $0 (join $1 $2))", lsig))
    assert not verify_witness(L, bundle).ok


def test_json_roundtrip(dl, lsig):
    again = WitnessBundle.from_json(json.loads(json.dumps(dl.to_json())), lsig)
    assert again == dl


def test_raw_json_matches_file(lsig):
    data = bundle_json("distributive-lattice")
    assert data["k"] == 0 and data["N"] == 5


@pytest.mark.parametrize(
    "patch, message",
    [
        ({"sigma": ["(meet $0 $8)"]}, "sigma"),
        ({"s": ["(meet $0 $14)"] * 5}, "width"),
        ({"p": ["(frob $0)", "$1", "$2"]}, "frob"),
        ({"k": -1}, "non-negative"),
    ],
)
def test_malformed_bundles(lsig, patch, message):
    data = bundle_json("dl-example-3-6")
    data.update(patch)
    with pytest.raises(BundleFormatError, match=message):
        WitnessBundle.from_json(data, lsig)


def test_missing_field(lsig):
    data = bundle_json("dl-example-3-6")
    del data["N"]
    with pytest.raises(BundleFormatError):
        WitnessBundle.from_json(data, lsig)


def test_unknown_theorem(dl):
    with pytest.raises(InputError):
        bundle_identities(dl, "strong")


# -- bundles with N = 0 ---------------------------------------------------------------

CORPUS = ["lattice2", "z2xor", "set2", "n5"]


def terms_over(sig, width, max_leaves=4):
    leaves = [st.integers(0, width - 1).map(Var)]
    leaves += [st.just(App(op, ())) for op, k in sig.ops if k == 0]
    binary = [op for op, k in sig.ops if k == 2]
    base = st.one_of(*leaves)
    if not binary:
        return base
    return st.recursive(
        base,
        lambda sub: st.builds(lambda op, a, b: App(op, (a, b)), st.sampled_from(binary), sub, sub),
        max_leaves=max_leaves,
    )


@st.composite
def n0_cases(draw):
    name = draw(st.sampled_from(CORPUS))
    A = load_algebra(name)
    sig = A.sig
    k = draw(st.integers(0, 1))
    m = draw(st.integers(0, 1))
    short = k + m + 1
    bundle = WitnessBundle(
        k=k, m=m, N=0,
        f=[draw(terms_over(sig, 2)) for _ in range(k)],
        g=[draw(terms_over(sig, 2)) for _ in range(k)],
        p=[draw(terms_over(sig, 3)) for _ in range(m)],
        s=[],
        sigma=[draw(terms_over(sig, 2 * (k + m + 2)))],
        eta1=[draw(terms_over(sig, short))],
        eta2=[draw(terms_over(sig, short))],
        eps1=[draw(terms_over(sig, short))],
        eps2=[draw(terms_over(sig, short))],
    )
    return A, bundle


@settings(max_examples=150, deadline=None)
@given(case=n0_cases())
def test_n0_bundle_forces_x_equals_y(case):
    A, bundle = case
    V = VarietyPresentation(A)
    if verify_witness(V, bundle).ok:
        assert holds_identity(V, Identity(Var(0), Var(1), 2))


def test_n0_bundle_passes_in_trivial_variety(lsig):
    T = VarietyPresentation(trivial_algebra(lsig))
    u, w = Var(0), Var(1)
    bundle = WitnessBundle(
        k=0, m=1, N=0, f=[], g=[], p=[Var(0)], s=[],
        sigma=[Var(4)], eta1=[u], eta2=[u], eps1=[w], eps2=[u],
    )
    assert verify_witness(T, bundle).ok
    assert holds_identity(T, Identity(Var(0), Var(1), 2))
    # the same bundle cannot pass in a nontrivial variety
    assert not verify_witness(VarietyPresentation(load_algebra("lattice2")), bundle).ok
