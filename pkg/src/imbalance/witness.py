"""Witness construction and the end-to-end imbalance verification.

The pipeline falsifies budget balance for a price rule f on a small,
explicit set of bid vectors:

1. pick two vectors on the same bidders together with a tag map h that
   assigns each bidder one of two rules (f itself or a helper rule g)
   such that exactly one of f, g changes value between the two vectors
   (``CounterexampleTriple`` / ``is_counterexample``);
2. for each bidder and each vector, build the adequate set that forces
   the payment on the corresponding deletion multiset;
3. with every forced payment substituted, the residual
   f(vector) - (1/n) * sum of tagged rule values differs between the two
   vectors (``residual_check``), so balance cannot hold on both - the
   union of the adequate sets plus the two vectors is a finite witness.

``verify_imbalance`` runs all hypothesis checks explicitly, logs each
one, and reports both residuals; ``vickrey_vectors`` and
``vickrey_witness_set`` build the stock instance that refutes balance for
the negated second-price rule.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .bids import (
    BidVector,
    bid_vector_to_json,
    extend,
    flat,
    full_family,
    preimage,
    remove,
)
from .payments import (
    AdequacyError,
    build_adequate_set,
    forced_payment_sum,
    is_adequate,
)
from .rationals import format_rational
from .rules import PriceRule, RuleArityError, RuleDomainError, get_rule

RULE_F = "F"
RULE_G = "G"


@dataclass(frozen=True)
class CounterexampleTriple:
    """Two vectors on the same bidders plus the per-bidder rule tags.

    ``h`` maps every bidder to RULE_F or RULE_G, selecting which of the
    two rules the bidder's forced payment evaluates through.
    """

    b_low: BidVector
    b_high: BidVector
    h: Mapping[int, str]
    g: PriceRule


@dataclass(frozen=True)
class HypothesisCheck:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class ImbalanceReport:
    """Outcome of one full verification run.

    ``holds`` is the strict inequality of the two residuals and is only
    set when every hypothesis passed; otherwise it is None and the run
    documents, via ``hypotheses``, why the instance does not qualify.
    ``witness_set`` collects every vector on which balance was imposed:
    all adequate-set members plus the two base vectors.
    """

    lhs: Fraction | None
    rhs: Fraction | None
    holds: bool | None
    eta_low: dict[int, Fraction]
    eta_high: dict[int, Fraction]
    witness_set: frozenset[BidVector]
    hypotheses: tuple[HypothesisCheck, ...]

    @property
    def hypotheses_met(self) -> bool:
        return all(check.passed for check in self.hypotheses)

    def to_json(self) -> dict:
        fmt = lambda v: None if v is None else format_rational(v)
        return {
            "lhs": fmt(self.lhs),
            "rhs": fmt(self.rhs),
            "holds": self.holds,
            "eta_low": {str(i): format_rational(v) for i, v in sorted(self.eta_low.items())},
            "eta_high": {str(i): format_rational(v) for i, v in sorted(self.eta_high.items())},
            "witness_size": len(self.witness_set),
            "hypotheses": [
                {"name": c.name, "pass": c.passed, "detail": c.detail}
                for c in self.hypotheses
            ],
        }


def is_counterexample(triple: CounterexampleTriple, rule: PriceRule) -> bool:
    """Whether the triple separates the two rules in the required way.

    Needs equal nonempty domains, a tag map that actually uses both rules
    somewhere, and value differences {f(high) - f(low), g(high) - g(low)}
    forming a strict superset of {0}: one difference zero, the other not.
    """
    dom = triple.b_low.dom
    if not dom or dom != triple.b_high.dom:
        return False
    tags = set()
    for bidder in dom:
        tag = triple.h.get(bidder)
        if tag not in (RULE_F, RULE_G):
            return False
        tags.add(tag)
    if tags != {RULE_F, RULE_G}:
        return False
    try:
        diff_f = rule(triple.b_high) - rule(triple.b_low)
        diff_g = triple.g(triple.b_high) - triple.g(triple.b_low)
    except (RuleArityError, RuleDomainError):
        return False
    diffs = {diff_f, diff_g}
    return 0 in diffs and diffs != {Fraction(0)}


def residual_check(
    triple: CounterexampleTriple, rule: PriceRule
) -> tuple[Fraction, Fraction, bool]:
    """Both residuals f(b) - (1/n) * sum of tagged rule values, and whether
    they differ (they always do on a valid counterexample triple)."""
    n = len(triple.b_low)
    if n < 2:
        raise ValueError(f"need at least 2 bidders, got {n}")
    if not is_counterexample(triple, rule):
        raise ValueError("not a counterexample triple for the given rule")

    def side(vector: BidVector) -> Fraction:
        tagged = sum(
            ((rule if triple.h[i] == RULE_F else triple.g)(vector) for i in sorted(vector.dom)),
            Fraction(0),
        )
        return rule(vector) - tagged / n

    lhs = side(triple.b_low)
    rhs = side(triple.b_high)
    return lhs, rhs, lhs != rhs


def vickrey_vectors(n: int) -> tuple[BidVector, BidVector]:
    """The stock pair on bidders 1..n+2: bids 1..n+1 then n+3, and the
    same with the (n+1)-th bid raised to n+2."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    low = {i: i for i in range(1, n + 2)}
    low[n + 2] = n + 3
    high = dict(low)
    high[n + 1] = n + 2
    return BidVector.of(low), BidVector.of(high)


def default_selector(vector: BidVector) -> dict[int, int]:
    """Partner map: everyone points at the top bidder, who points at the
    runner-up (ties broken by bidder id)."""
    ranked = sorted(vector.entries, key=lambda e: (e[1], e[0]))
    top = ranked[-1][0]
    runner_up = ranked[-2][0]
    return {i: (top if i != top else runner_up) for i in vector.dom}


def vickrey_instance(
    n: int, g: PriceRule | None = None
) -> tuple[CounterexampleTriple, dict[int, int], dict[int, int]]:
    """Counterexample triple and selectors for the stock instance.

    Tags: the top bidder goes through the main rule, everyone else
    through g (negated first price by default).
    """
    g = g if g is not None else get_rule("neg-first-price")
    low, high = vickrey_vectors(n)
    top = n + 2
    h = {i: (RULE_F if i == top else RULE_G) for i in low.dom}
    triple = CounterexampleTriple(b_low=low, b_high=high, h=h, g=g)
    return triple, default_selector(low), default_selector(high)


def vickrey_witness_set(n: int) -> frozenset[BidVector]:
    """The canonical finite set on which balance is already contradictory.

    For each of the two stock vectors: one extended completion family per
    non-top bidder (paired with the top bidder, filled at the top bid),
    plus one family pairing the top bidder with the runner-up (filled at
    the runner-up's bid); the two stock vectors themselves complete the
    set.  Duplicates merge under graph equality.
    """
    low, high = vickrey_vectors(n)
    top_bid = Fraction(n + 3)
    out: set[BidVector] = {low, high}
    for vector, runner_bid in ((low, Fraction(n + 1)), (high, Fraction(n + 2))):
        (top_id,) = preimage(vector, {top_bid})
        for i in sorted(vector.dom - {top_id}):
            family = full_family(remove(vector, {i, top_id}), top_bid)
            out |= extend(flat({i, top_id}, top_bid), family.members)
        pair = preimage(vector, {runner_bid, top_bid})
        family = full_family(remove(vector, pair), runner_bid)
        out |= extend(flat(pair, runner_bid), family.members)
    return frozenset(out)


def verify_imbalance(
    rule: PriceRule,
    triple: CounterexampleTriple,
    selector_low: Mapping[int, int],
    selector_high: Mapping[int, int],
) -> ImbalanceReport:
    """Check every hypothesis of the imbalance criterion and report.

    In order: the counterexample conditions; per bidder and per vector,
    selector validity and adequacy of the forced-payment set; per bidder
    and per vector, that the rule's flat value at the partner's bid equals
    the tagged rule's value (so the forced sum telescopes against the tag
    map).  Failures are logged, never raised: the report shows why a
    candidate instance does not qualify.  When all hypotheses pass, the
    residuals are computed through the forced payment sums and must
    differ.
    """
    checks: list[HypothesisCheck] = []
    dom = triple.b_low.dom
    counter_ok = is_counterexample(triple, rule) and len(dom) >= 2
    checks.append(
        HypothesisCheck(
            "counterexample",
            counter_ok,
            "" if counter_ok else "triple does not separate the two rules on >= 2 bidders",
        )
    )

    sides = (
        ("low", triple.b_low, selector_low),
        ("high", triple.b_high, selector_high),
    )
    witness: set[BidVector] = {triple.b_low, triple.b_high}
    adequacy_ok = {"low": True, "high": True}
    for label, vector, selector in sides:
        for i in sorted(vector.dom):
            partner = selector.get(i)
            if partner is None or partner == i or partner not in vector.dom:
                checks.append(
                    HypothesisCheck(
                        f"adequate[{label},{i}]", False, f"invalid partner {partner!r}"
                    )
                )
                adequacy_ok[label] = False
                continue
            base = remove(vector, {i, partner})
            adequate = build_adequate_set(base, vector[partner], rule, i, partner)
            ok = is_adequate(adequate.members, base, vector[partner], rule, i, partner)
            detail = "" if ok else f"rule not flat-invariant at fill {format_rational(vector[partner])}"
            checks.append(HypothesisCheck(f"adequate[{label},{i}]", ok, detail))
            if ok:
                witness |= adequate.members
            else:
                adequacy_ok[label] = False

    for label, vector, selector in sides:
        for i in sorted(vector.dom):
            partner = selector.get(i)
            if partner is None or partner not in vector.dom:
                checks.append(
                    HypothesisCheck(f"eta[{label},{i}]", False, "no valid partner")
                )
                continue
            tag = triple.h.get(i)
            try:
                flat_value = rule(flat(vector.dom, vector[partner]))
                tagged_value = (rule if tag == RULE_F else triple.g)(vector)
                ok = tag in (RULE_F, RULE_G) and flat_value == tagged_value
                detail = (
                    ""
                    if ok
                    else f"flat value {format_rational(flat_value)} differs from "
                    f"tagged value {format_rational(tagged_value)}"
                )
            except (RuleArityError, RuleDomainError) as exc:
                ok, detail = False, str(exc)
            checks.append(HypothesisCheck(f"eta[{label},{i}]", ok, detail))

    lhs = rhs = None
    eta_low: dict[int, Fraction] = {}
    eta_high: dict[int, Fraction] = {}
    if adequacy_ok["low"]:
        try:
            total_low, eta_low = forced_payment_sum(triple.b_low, rule, selector_low)
            lhs = rule(triple.b_low) - total_low
        except (AdequacyError, ValueError):
            lhs = None
    if adequacy_ok["high"]:
        try:
            total_high, eta_high = forced_payment_sum(triple.b_high, rule, selector_high)
            rhs = rule(triple.b_high) - total_high
        except (AdequacyError, ValueError):
            rhs = None

    hypotheses = tuple(checks)
    met = all(c.passed for c in hypotheses)
    holds = (lhs != rhs) if (met and lhs is not None and rhs is not None) else None
    return ImbalanceReport(
        lhs=lhs,
        rhs=rhs,
        holds=holds,
        eta_low=eta_low,
        eta_high=eta_high,
        witness_set=frozenset(witness),
        hypotheses=hypotheses,
    )


def witness_set_to_json(vectors: frozenset[BidVector]) -> list[dict]:
    """Canonically sorted JSON array of bid vectors."""
    return [bid_vector_to_json(v) for v in sorted(vectors, key=lambda b: b.entries)]
