"""Command-line interface: rule evaluation, witness generation, imbalance
verification, and balance refutation with certificates.

Exit codes are stable across commands: 0 for an affirmative result, 3 for
a refutation or unmet hypotheses (a finding, not a failure), 2 for usage
or parse errors.  All output is deterministic byte for byte.  The
environment variable IMBALANCE_MAX_DOM (default 10) caps bid-vector
domains to guard against accidental exponential enumeration.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from .bids import BidVector, bid_vector_from_json
from .feasibility import (
    build_balance_system,
    certificate_to_json,
    solve_or_refute,
    system_from_json,
    verify_certificate,
    Feasible,
)
from .payments import build_payment_table
from .rationals import RationalParseError, format_rational
from .rules import RuleArityError, RuleDomainError, get_rule
from .witness import (
    verify_imbalance,
    vickrey_instance,
    vickrey_witness_set,
    witness_set_to_json,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_FINDING = 3

DEFAULT_MAX_DOM = 10


@dataclass
class CliConfig:
    command: str
    rule: str = "neg-second-price"
    g: str = "neg-first-price"
    n: int | None = None
    bids: str | None = None
    witness: str | None = None
    system: str | None = None
    out: str | None = None
    trace: bool = False


class _UsageError(Exception):
    pass


def _max_dom() -> int:
    raw = os.environ.get("IMBALANCE_MAX_DOM")
    if raw is None:
        return DEFAULT_MAX_DOM
    try:
        cap = int(raw)
    except ValueError:
        raise _UsageError(f"IMBALANCE_MAX_DOM must be an integer, got {raw!r}")
    if cap < 1:
        raise _UsageError(f"IMBALANCE_MAX_DOM must be positive, got {cap}")
    return cap


def _check_dom(size: int, what: str) -> None:
    cap = _max_dom()
    if size > cap:
        raise _UsageError(
            f"{what} has {size} bidders, above the IMBALANCE_MAX_DOM cap of {cap}"
        )


def _load_json(path: str):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise _UsageError(f"no such file: {path}")
    except json.JSONDecodeError as exc:
        raise _UsageError(f"invalid JSON in {path}: {exc}")


def _load_bid_vector(path: str) -> BidVector:
    try:
        vector = bid_vector_from_json(_load_json(path))
    except (ValueError, RationalParseError) as exc:
        raise _UsageError(f"bad bid vector in {path}: {exc}")
    _check_dom(len(vector), f"bid vector in {path}")
    return vector


def _load_witness(path: str) -> list[BidVector]:
    obj = _load_json(path)
    if not isinstance(obj, list):
        raise _UsageError(f"witness file {path} must be a JSON array of bid vectors")
    vectors = []
    for entry in obj:
        try:
            vector = bid_vector_from_json(entry)
        except (ValueError, RationalParseError) as exc:
            raise _UsageError(f"bad bid vector in {path}: {exc}")
        _check_dom(len(vector), f"bid vector in {path}")
        vectors.append(vector)
    return vectors


def _get_rule(name: str):
    try:
        return get_rule(name)
    except (ValueError, RationalParseError) as exc:
        raise _UsageError(str(exc))


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write_out(path: str | None, text: str) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _require_n(config: CliConfig) -> int:
    if config.n is None or config.n < 1:
        raise _UsageError(f"--n must be a positive integer, got {config.n}")
    _check_dom(config.n + 2, f"the instance for n={config.n}")
    return config.n


def cmd_eval(config: CliConfig) -> int:
    rule = _get_rule(config.rule)
    vector = _load_bid_vector(config.bids)
    try:
        value = rule(vector)
    except (RuleArityError, RuleDomainError) as exc:
        raise _UsageError(str(exc))
    print(format_rational(value))
    return EXIT_OK


def cmd_theorem(config: CliConfig) -> int:
    n = _require_n(config)
    rule = _get_rule(config.rule)
    g = _get_rule(config.g)
    triple, selector_low, selector_high = vickrey_instance(n, g=g)
    report = verify_imbalance(rule, triple, selector_low, selector_high)

    if config.trace:
        for check in report.hypotheses:
            status = "PASS" if check.passed else "FAIL"
            suffix = f" ({check.detail})" if check.detail else ""
            print(f"HYP {check.name} {status}{suffix}")
        try:
            _, trace = build_payment_table(n + 2, n + 3, list(range(1, n + 1)), rule)
            for j, (shape, coeff) in enumerate(trace.steps):
                values = ",".join(format_rational(v) for v in shape.values)
                print(f"k_{j} = {format_rational(coeff)} @ [{values}]")
        except Exception as exc:  # trace is diagnostic only
            print(f"iteration trace unavailable: {exc}")

    if config.out:
        _write_out(config.out, _dump(report.to_json()))

    if report.hypotheses_met and report.holds:
        print(f"HOLDS lhs={format_rational(report.lhs)} rhs={format_rational(report.rhs)}")
        return EXIT_OK
    if report.hypotheses_met:
        print("HYPOTHESES MET BUT RESIDUALS EQUAL")
        return EXIT_FINDING
    print("HYPOTHESES NOT MET")
    return EXIT_FINDING


def cmd_witness(config: CliConfig) -> int:
    n = _require_n(config)
    vectors = vickrey_witness_set(n)
    _write_out(config.out, _dump(witness_set_to_json(vectors)))
    return EXIT_OK


def cmd_check_balance(config: CliConfig) -> int:
    rule = _get_rule(config.rule)
    vectors = _load_witness(config.witness)
    try:
        system = build_balance_system(vectors, rule)
    except ValueError as exc:
        raise _UsageError(str(exc))
    result = solve_or_refute(system)
    if isinstance(result, Feasible):
        print("FEASIBLE")
        if config.out:
            _write_out(config.out, _dump({"status": "FEASIBLE",
                                          "assignment": result.assignment.to_json()}))
        return EXIT_OK
    verified = verify_certificate(system, result.certificate)
    print(f"INFEASIBLE certificate-verified={str(verified).lower()}")
    cert_json = certificate_to_json(result.certificate)
    if config.out:
        _write_out(config.out, _dump({"status": "INFEASIBLE", "certificate": cert_json}))
    else:
        print(json.dumps(cert_json, sort_keys=True))
    return EXIT_FINDING


def cmd_solve_system(config: CliConfig) -> int:
    try:
        system = system_from_json(_load_json(config.system))
    except (ValueError, RationalParseError) as exc:
        raise _UsageError(f"bad system in {config.system}: {exc}")
    result = solve_or_refute(system)
    if isinstance(result, Feasible):
        print("FEASIBLE")
        print(json.dumps(result.assignment.to_json(), sort_keys=True))
        return EXIT_OK
    verified = verify_certificate(system, result.certificate)
    print(f"INFEASIBLE certificate-verified={str(verified).lower()}")
    print(json.dumps(certificate_to_json(result.certificate), sort_keys=True))
    return EXIT_FINDING


_HANDLERS = {
    "eval": cmd_eval,
    "theorem": cmd_theorem,
    "witness": cmd_witness,
    "check-balance": cmd_check_balance,
    "solve-system": cmd_solve_system,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="imbalance",
        description="Exact budget-imbalance verification for symmetric auction rules.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="evaluate a price rule on a bid vector")
    p_eval.add_argument("--rule", required=True)
    p_eval.add_argument("--bids", required=True, help="bid vector JSON file")

    p_theorem = sub.add_parser("theorem", help="verify the imbalance criterion")
    p_theorem.add_argument("--n", type=int, required=True)
    p_theorem.add_argument("--rule", default="neg-second-price")
    p_theorem.add_argument("--g", default="neg-first-price")
    p_theorem.add_argument("--out", help="write the report JSON here")
    p_theorem.add_argument("--trace", action="store_true")

    p_witness = sub.add_parser("witness", help="emit the canonical witness set")
    p_witness.add_argument("--n", type=int, required=True)
    p_witness.add_argument("--out", help="write the witness JSON here (default stdout)")

    p_check = sub.add_parser("check-balance", help="decide balance over a witness file")
    p_check.add_argument("--witness", required=True)
    p_check.add_argument("--rule", required=True)
    p_check.add_argument("--out", help="write the result JSON here")

    p_solve = sub.add_parser("solve-system", help="decide a raw linear system file")
    p_solve.add_argument("--system", required=True)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    config = CliConfig(
        command=args.command,
        rule=getattr(args, "rule", "neg-second-price"),
        g=getattr(args, "g", "neg-first-price"),
        n=getattr(args, "n", None),
        bids=getattr(args, "bids", None),
        witness=getattr(args, "witness", None),
        system=getattr(args, "system", None),
        out=getattr(args, "out", None),
        trace=getattr(args, "trace", False),
    )
    try:
        return _HANDLERS[config.command](config)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
