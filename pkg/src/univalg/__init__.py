"""Computations in finitely generated varieties of universal algebras."""

from .algebra import (
    Congruence,
    FiniteAlgebra,
    Homomorphism,
    Relation,
    all_congruences,
    congruence_generated,
    enumerate_reflexive_relations,
    hom_enumerate,
    is_subdirectly_irreducible,
    jointly_surjective,
    power,
    product,
    pullback_split_epis,
    quotient,
    relation_properties,
    subalgebra_generate,
)
from .builtins import load_algebra, load_bundle
from .errors import (
    CapExceeded,
    InputError,
    LimitExceeded,
    NotAHomomorphism,
    NotCongruenceDistributive,
    SignatureMismatch,
    TermParseError,
    UAError,
)
from .maltsev import (
    SeparationCertificate,
    Verdict,
    build_core,
    cd_certify,
    check_certificate,
    dominion_member,
    maltsev_term,
    reg_maltsev,
    weakly_maltsev,
)
from .terms import (
    App,
    Identity,
    Signature,
    Var,
    eval_term,
    parse_term,
    render_term,
    substitute,
    term_function,
)
from .variety import (
    VarietyPresentation,
    cokernel_pair,
    coequalizer,
    coproduct,
    couniversal_factor,
    free_algebra,
    holds_identity,
    zigzag_step_relation,
)
from .witness import WitnessBundle, maltsev_bundle, verify_witness

__version__ = "0.1.0"
