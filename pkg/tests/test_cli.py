import json
from fractions import Fraction

import pytest

from imbalance import (
    bid_vector_from_json,
    build_balance_system,
    certificate_from_json,
    get_rule,
    system_to_json,
    verify_certificate,
    vickrey_witness_set,
)
from imbalance.cli import main


def write_json(path, obj):
    path.write_text(json.dumps(obj), encoding="utf-8")
    return str(path)


@pytest.fixture
def bids_file(tmp_path):
    return write_json(tmp_path / "bids.json", {"bids": {"1": "1", "2": "2", "3": "4"}})


class TestEval:
    def test_second_price(self, bids_file, capsys):
        assert main(["eval", "--rule", "second-price", "--bids", bids_file]) == 0
        assert capsys.readouterr().out == "2\n"

    def test_constant(self, bids_file, capsys):
        assert main(["eval", "--rule", "constant:7", "--bids", bids_file]) == 0
        assert capsys.readouterr().out == "7\n"

    def test_arity_error(self, tmp_path, capsys):
        single = write_json(tmp_path / "one.json", {"bids": {"1": "5"}})
        assert main(["eval", "--rule", "second-price", "--bids", single]) == 2
        assert "rule undefined on this arity" in capsys.readouterr().err

    def test_malformed_file(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{nope", encoding="utf-8")
        assert main(["eval", "--rule", "second-price", "--bids", str(bad)]) == 2

    def test_missing_file(self, capsys):
        assert main(["eval", "--rule", "second-price", "--bids", "/nonexistent.json"]) == 2


class TestTheorem:
    def test_n1_summary_and_report(self, tmp_path, capsys):
        out = tmp_path / "report.json"
        assert main(["theorem", "--n", "1", "--out", str(out)]) == 0
        assert capsys.readouterr().out == "HOLDS lhs=4/3 rhs=2/3\n"
        report = json.loads(out.read_text())
        assert report["holds"] is True
        assert report["lhs"] == "4/3" and report["rhs"] == "2/3"
        assert all(h["pass"] for h in report["hypotheses"])

    def test_n4_difference(self, tmp_path):
        out = tmp_path / "report.json"
        assert main(["theorem", "--n", "4", "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        lhs = Fraction(report["lhs"])
        rhs = Fraction(report["rhs"])
        assert lhs - rhs == Fraction(5, 6)

    def test_n0_usage_error(self, capsys):
        assert main(["theorem", "--n", "0"]) == 2
        assert "--n" in capsys.readouterr().err

    def test_constant_rules_fail_hypotheses(self, capsys):
        code = main(["theorem", "--n", "1", "--rule", "constant:0", "--g", "constant:0"])
        assert code == 3
        assert "HYPOTHESES NOT MET" in capsys.readouterr().out

    def test_trace_lines(self, capsys):
        assert main(["theorem", "--n", "1", "--trace"]) == 0
        out = capsys.readouterr().out
        assert "HYP counterexample PASS" in out
        assert "k_0 = 1/3 @ [4,4]" in out
        assert "k_1 = 1/3 @ [1,4]" in out

    def test_unknown_rule(self, capsys):
        assert main(["theorem", "--n", "1", "--rule", "nth-price"]) == 2

    def test_report_bytes_are_deterministic(self, tmp_path):
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        main(["theorem", "--n", "2", "--out", str(first)])
        main(["theorem", "--n", "2", "--out", str(second)])
        assert first.read_bytes() == second.read_bytes()


class TestWitness:
    def test_writes_canonical_set(self, tmp_path):
        out = tmp_path / "w1.json"
        assert main(["witness", "--n", "1", "--out", str(out)]) == 0
        vectors = {bid_vector_from_json(o) for o in json.loads(out.read_text())}
        assert vectors == vickrey_witness_set(1)

    def test_deterministic_bytes(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        main(["witness", "--n", "2", "--out", str(a)])
        main(["witness", "--n", "2", "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_stdout_default(self, capsys):
        assert main(["witness", "--n", "1"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert len(payload) == 10


class TestCheckBalance:
    @pytest.fixture
    def witness_file(self, tmp_path):
        out = tmp_path / "w1.json"
        main(["witness", "--n", "1", "--out", str(out)])
        return str(out)

    def test_refutation_with_certificate(self, witness_file, capsys):
        code = main(["check-balance", "--witness", witness_file, "--rule", "neg-second-price"])
        assert code == 3
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "INFEASIBLE certificate-verified=true"
        cert = certificate_from_json(json.loads(lines[1]))
        system = build_balance_system(vickrey_witness_set(1), get_rule("neg-second-price"))
        assert verify_certificate(system, cert)

    def test_constant_zero_feasible(self, witness_file, capsys):
        code = main(["check-balance", "--witness", witness_file, "--rule", "constant:0"])
        assert code == 0
        assert capsys.readouterr().out == "FEASIBLE\n"

    def test_result_file(self, witness_file, tmp_path, capsys):
        out = tmp_path / "result.json"
        main(["check-balance", "--witness", witness_file, "--rule", "neg-second-price",
              "--out", str(out)])
        payload = json.loads(out.read_text())
        assert payload["status"] == "INFEASIBLE"
        assert "certificate" in payload

    def test_bad_witness_file(self, tmp_path, capsys):
        bad = write_json(tmp_path / "w.json", {"bids": {}})
        assert main(["check-balance", "--witness", bad, "--rule", "constant:0"]) == 2


class TestSolveSystem:
    def test_consistent_single_row(self, tmp_path, capsys):
        from imbalance import flat

        system = build_balance_system([flat({1, 2, 3}, 4)], get_rule("neg-second-price"))
        path = write_json(tmp_path / "sys.json", system_to_json(system))
        assert main(["solve-system", "--system", path]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "FEASIBLE"
        assert json.loads(lines[1]) == [{"multiset": ["4", "4"], "value": "-4/3"}]

    def test_contradictory_file(self, tmp_path, capsys):
        obj = {
            "variables": [["1"]],
            "rows": [
                {"coeffs": {"0": "1"}, "rhs": "1", "origin": {"bids": {}}},
                {"coeffs": {"0": "1"}, "rhs": "2", "origin": {"bids": {}}},
            ],
        }
        path = write_json(tmp_path / "sys.json", obj)
        assert main(["solve-system", "--system", path]) == 3
        assert "INFEASIBLE certificate-verified=true" in capsys.readouterr().out

    def test_malformed_system(self, tmp_path):
        path = write_json(tmp_path / "sys.json", {"rows": []})
        assert main(["solve-system", "--system", path]) == 2


class TestUsage:
    def test_no_command(self):
        assert main([]) == 2

    def test_unknown_command(self):
        assert main(["frobnicate"]) == 2

    def test_max_dom_cap(self, monkeypatch, capsys):
        monkeypatch.setenv("IMBALANCE_MAX_DOM", "4")
        assert main(["theorem", "--n", "3"]) == 2
        assert "IMBALANCE_MAX_DOM" in capsys.readouterr().err
        monkeypatch.setenv("IMBALANCE_MAX_DOM", "5")
        assert main(["theorem", "--n", "3"]) == 0

    def test_bad_cap_value(self, monkeypatch):
        monkeypatch.setenv("IMBALANCE_MAX_DOM", "many")
        assert main(["witness", "--n", "1"]) == 2
