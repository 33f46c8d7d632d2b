"""Price rules: total maps from bid vectors to exact rational amounts.

The built-in rules are symmetric (they factor through the bid multiset):

* ``second-price``   highest bid after deleting one occurrence of the
  maximum, i.e. the second highest counted with multiplicity; needs at
  least two bidders,
* ``first-price``    the maximum bid,
* ``neg-second-price`` / ``neg-first-price``   negations of the above,
* ``constant:<p/q>`` ignores the bids entirely.

Table-backed rules (``register_external``) are defined on an explicit
finite set of vectors only, which lets tests and experiments plug in
arbitrary maps.  Rules are immutable after construction and evaluation is
pure, so they are safe to share.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .bids import BidVector, flat
from .rationals import ensure_rational, format_rational


class RuleArityError(ValueError):
    """The rule is undefined on vectors with this few bidders."""


class RuleDomainError(ValueError):
    """A table-backed rule was evaluated outside its table."""


@dataclass(frozen=True)
class PriceRule:
    """Named total map BidVector -> Fraction (total above ``min_arity``)."""

    name: str
    min_arity: int
    fn: Callable[[BidVector], Fraction] = field(compare=False, repr=False)

    def __call__(self, vector: BidVector) -> Fraction:
        if len(vector) < self.min_arity:
            raise RuleArityError(
                f"rule undefined on this arity: {self.name!r} needs at least "
                f"{self.min_arity} bidders, got {len(vector)}"
            )
        return self.fn(vector)


def _second_price(vector: BidVector) -> Fraction:
    ranked = sorted(v for _, v in vector.entries)
    return ranked[-2]


def _first_price(vector: BidVector) -> Fraction:
    return max(v for _, v in vector.entries)


def get_rule(name: str) -> PriceRule:
    """Look up a built-in rule by its registry name."""
    if name == "second-price":
        return PriceRule(name, 2, _second_price)
    if name == "neg-second-price":
        return PriceRule(name, 2, lambda b: -_second_price(b))
    if name == "first-price":
        return PriceRule(name, 1, _first_price)
    if name == "neg-first-price":
        return PriceRule(name, 1, lambda b: -_first_price(b))
    if name.startswith("constant:"):
        value = ensure_rational(name.split(":", 1)[1])
        canonical = f"constant:{format_rational(value)}"
        return PriceRule(canonical, 1, lambda b: value)
    raise ValueError(
        f"unknown rule {name!r}; expected second-price, neg-second-price, "
        "first-price, neg-first-price, or constant:<p/q>"
    )


def register_external(name: str, table: Mapping[BidVector, object]) -> PriceRule:
    """Rule defined exactly on the table's vectors; lookups elsewhere fail."""
    if not table:
        raise ValueError("external rule table must be nonempty")
    frozen = {BidVector.of(k): ensure_rational(v) for k, v in table.items()}

    def lookup(vector: BidVector) -> Fraction:
        try:
            return frozen[vector]
        except KeyError:
            raise RuleDomainError(
                f"rule undefined at this bid vector: {name!r} has no entry for {vector!r}"
            ) from None

    return PriceRule(f"external:{name}", 0, lookup)


def check_flat_invariance(
    rule: PriceRule, vectors: Iterable[BidVector], bidders: Iterable[int], fill
) -> bool:
    """Whether the rule takes its flat value on every vector.

    Each vector must have domain exactly ``bidders``; the reference value
    is the rule applied to the constant vector at ``fill``.
    """
    ids = frozenset(bidders)
    vecs = list(vectors)
    for vec in vecs:
        if vec.dom != ids:
            raise ValueError(
                f"domain mismatch: expected bidders {sorted(ids)}, got {sorted(vec.dom)}"
            )
    target = rule(flat(ids, fill))
    return all(rule(vec) == target for vec in vecs)
