"""Exact verification that symmetric auction payment rules break budget balance.

Builds finite witness sets of bid vectors, evaluates the closed-form
symmetric payments they force, verifies the imbalance criterion end to
end, and independently refutes balance with an exact linear-feasibility
oracle producing machine-checkable certificates.  All arithmetic is exact
rational; there is no floating point anywhere.
"""

from .bids import (
    BidMultiset,
    BidVector,
    FullFamily,
    bag_of,
    bid_vector_from_json,
    bid_vector_to_json,
    completion,
    extend,
    flat,
    fresh_bidders,
    full_family,
    multiset_from_json,
    multiset_to_json,
    preimage,
    remove,
    restrictions,
    sub_multisets,
)
from .feasibility import (
    Certificate,
    Feasible,
    Infeasible,
    LinearRow,
    LinearSystem,
    build_balance_system,
    certificate_from_json,
    certificate_to_json,
    solve_or_refute,
    system_from_json,
    system_to_json,
    verify_certificate,
)
from .payments import (
    AdequacyError,
    AdequateSet,
    IterationTrace,
    PaymentLookupError,
    PaymentTable,
    build_adequate_set,
    build_payment_table,
    forced_payment,
    forced_payment_sum,
    has_full_family_structure,
    is_adequate,
)
from .rationals import (
    EQ,
    GT,
    LT,
    Rational,
    RationalParseError,
    add,
    compare,
    div,
    ensure_rational,
    format_rational,
    make_rational,
    mul,
    parse_rational,
    sub,
)
from .rules import (
    PriceRule,
    RuleArityError,
    RuleDomainError,
    check_flat_invariance,
    get_rule,
    register_external,
)
from .witness import (
    RULE_F,
    RULE_G,
    CounterexampleTriple,
    HypothesisCheck,
    ImbalanceReport,
    default_selector,
    is_counterexample,
    residual_check,
    verify_imbalance,
    vickrey_instance,
    vickrey_vectors,
    vickrey_witness_set,
    witness_set_to_json,
)

__version__ = "0.1.0"
