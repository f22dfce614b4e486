import math
import os
from fractions import Fraction

import pytest

from pigeonlab import harness as H
from pigeonlab.errors import ParameterError, ParseError

GOLDEN = os.path.join(os.path.dirname(__file__), "golden")


# chernoff


def test_chernoff_vacuous_at_zero():
    assert H.chernoff_bound(10, 0) == 2.0
    assert H.chernoff_bound(0, 0) == 2.0
    assert H.chernoff_report(10, 0) == 1.0


def test_chernoff_example():
    assert H.chernoff_bound(50, 30) == pytest.approx(2 * math.exp(-900 / 130), rel=1e-12)
    assert H.chernoff_bound(Fraction(1, 2), Fraction(3, 2)) == pytest.approx(2 * math.exp(-(9 / 4) / (5 / 2)))


def test_chernoff_monotone_grid():
    for mu in (0, 1, 5, 50, 400):
        vals = [H.chernoff_bound(mu, Fraction(d, 4)) for d in range(0, 400)]
        assert all(a >= b for a, b in zip(vals, vals[1:])), mu
        assert all(a > b for a, b in zip(vals[4:], vals[5:]) if b > 0)
    # and increasing in mu for fixed dev
    for dev in (1, 10, 40):
        vals = [H.chernoff_bound(mu, dev) for mu in range(0, 200)]
        assert all(a <= b for a, b in zip(vals, vals[1:]))


def test_chernoff_rejects_negative():
    with pytest.raises(ParameterError):
        H.chernoff_bound(-1, 2)
    with pytest.raises(ParameterError):
        H.chernoff_bound(1, -2)


# config and ranges


def test_parse_config():
    cfg = H.parse_config("# sweep\nnode-budget = 5000\n\nvariant=fphp  # trailing\n ns = 3..5\n")
    assert cfg == {"node_budget": "5000", "variant": "fphp", "ns": "3..5"}


@pytest.mark.parametrize("text,line", [("just words\n", 1), ("a = 1\n = 2\n", 2)])
def test_parse_config_errors(text, line):
    with pytest.raises(ParseError) as e:
        H.parse_config(text)
    assert e.value.line == line


def test_parse_int_list():
    assert H.parse_int_list("3..7") == (3, 4, 5, 6, 7)
    assert H.parse_int_list("1, 4..6,9") == (1, 4, 5, 6, 9)
    assert H.parse_int_list("") == ()
    with pytest.raises(ParameterError):
        H.parse_int_list("7..3")


# experiment specs and rows


def test_spec_validation():
    with pytest.raises(ParameterError):
        H.ExperimentSpec(variant="xphp")
    with pytest.raises(ParameterError):
        H.ExperimentSpec(family="random")  # no delta
    with pytest.raises(ParameterError):
        H.ExperimentSpec(node_budget=0)
    with pytest.raises(ParameterError):
        H.ExperimentSpec(seeds=())
    with pytest.raises(ParameterError):
        H.ExperimentSpec(family="file")


def test_row_invariants():
    H.ResultRow(3, 4, 3, 0, "php", "dpll", "unsat", 64, None, 1)
    with pytest.raises(ParameterError):
        H.ResultRow(3, 4, 3, 0, "php", "dpll", "unsat", None, None, 1)
    with pytest.raises(ParameterError):
        H.ResultRow(3, 4, 3, 0, "php", "dpll", "budget", 12, None, 1)
    with pytest.raises(ParameterError):
        H.ResultRow(3, 4, 3, 0, "php", "dpll", "timeout", None, None, 1)


def test_csv_round_trip_golden():
    with open(os.path.join(GOLDEN, "results.csv"), encoding="utf-8") as fh:
        text = fh.read()
    rows = H.parse_results(text)
    assert [r.verdict for r in rows] == ["unsat", "unsat", "budget", "sat"]
    assert H.CSV_HEADER + "\n" + "".join(r.csv_line() + "\n" for r in rows) == text
    with pytest.raises(ParseError):
        H.parse_results("n,m\n")
    with pytest.raises(ParseError):
        H.parse_results(H.CSV_HEADER + "\n1,2,3\n")


# experiments


def _strip_ms(text):
    return [line.rsplit(",", 1)[0] for line in text.splitlines()]


def test_php_sweep(tmp_path):
    spec = H.ExperimentSpec(ns=(3, 4, 5, 6, 7), out_csv=str(tmp_path / "r.csv"),
                            out_plot=str(tmp_path / "r.json"), width_slack=Fraction(1))
    rows = H.run_experiment(spec)
    assert [r.n for r in rows] == [3, 4, 5, 6, 7]
    assert all(r.verdict == "unsat" for r in rows)
    lengths = [r.proof_length for r in rows]
    assert lengths == sorted(set(lengths))
    assert lengths == [64, 233, 1051, 5995, 41294]  # frozen from the first run
    text = (tmp_path / "r.csv").read_text()
    assert text.splitlines()[0] == H.CSV_HEADER
    assert len(text.splitlines()) == 6
    import json

    plot = json.loads((tmp_path / "r.json").read_text())
    assert plot["y"]["scale"] == "log" and plot["x"]["field"] == "n"
    assert plot["data"] == "r.csv"


def test_empty_sweep(tmp_path):
    out = tmp_path / "e.csv"
    rows = H.run_experiment(H.ExperimentSpec(ns=(), out_csv=str(out)))
    assert rows == []
    assert out.read_text() == H.CSV_HEADER + "\n"


def test_determinism_and_workers(tmp_path):
    kw = dict(family="random", ns=(4, 5, 6), delta=3, seeds=(0, 1, 2), variant="fphp")
    a = H.run_experiment(H.ExperimentSpec(out_csv=str(tmp_path / "a.csv"), **kw))
    H.run_experiment(H.ExperimentSpec(out_csv=str(tmp_path / "b.csv"), **kw))
    H.run_experiment(H.ExperimentSpec(out_csv=str(tmp_path / "c.csv"), workers=2, **kw))
    ta, tb, tc = ((tmp_path / f"{x}.csv").read_text() for x in "abc")
    assert _strip_ms(ta) == _strip_ms(tb) == _strip_ms(tc)
    assert [(r.n, r.seed) for r in a] == sorted((r.n, r.seed) for r in a)


def test_budget_rows_not_crashes(tmp_path):
    rows = H.run_experiment(H.ExperimentSpec(ns=(5, 6), node_budget=5, out_csv=str(tmp_path / "b.csv")))
    assert [r.verdict for r in rows] == ["budget", "budget"]
    assert all(r.proof_length is None for r in rows)
    rows = H.run_experiment(H.ExperimentSpec(ns=(6,), solver="dp", clause_budget=10,
                                             out_csv=str(tmp_path / "d.csv")))
    assert rows[0].verdict == "budget"


def test_sat_rows(tmp_path):
    # m = n - 1 pigeons fit: satisfiable
    rows = H.run_experiment(H.ExperimentSpec(ns=(3, 4), m_offset=-1, out_csv=str(tmp_path / "s.csv")))
    assert [r.verdict for r in rows] == ["sat", "sat"]


def test_unwritable_output_fails_before_solving(tmp_path, monkeypatch):
    calls = []
    monkeypatch.setattr(H, "run_point", lambda *a: calls.append(a))
    with pytest.raises(OSError):
        H.run_experiment(H.ExperimentSpec(out_csv=str(tmp_path / "missing" / "r.csv")))
    with pytest.raises(OSError):
        H.run_experiment(H.ExperimentSpec(out_csv=str(tmp_path / "ok.csv"),
                                          out_plot=str(tmp_path / "missing" / "p.json")))
    assert calls == []


def test_kept_proofs_verify(tmp_path):
    spec = H.ExperimentSpec(variant="fphp", family="random", ns=(4, 5, 6), delta=3, seeds=(0, 1),
                            out_csv=str(tmp_path / "k.csv"), keep_proofs=str(tmp_path / "proofs"))
    rows = H.run_experiment(spec)
    unsat = [r for r in rows if r.verdict == "unsat"]
    assert unsat
    assert len(os.listdir(tmp_path / "proofs")) == len(unsat)
    assert H.verify_kept_proofs(spec, rows) == []


def test_file_family(tmp_path):
    gpath = os.path.join(GOLDEN, "g_m12_n8_d4_s7.graph")
    spec = H.ExperimentSpec(family="file", graph_files=(gpath,), variant="fphp", seeds=(0, 3),
                            out_csv=str(tmp_path / "f.csv"), keep_proofs=str(tmp_path / "p"))
    rows = H.run_experiment(spec)
    assert [(r.n, r.m, r.seed) for r in rows] == [(8, 12, 0), (8, 12, 3)]
    assert all(r.verdict == "unsat" for r in rows)
    assert H.verify_kept_proofs(spec, rows) == []
