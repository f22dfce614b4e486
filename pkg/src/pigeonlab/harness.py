"""Experiment runner, flat config files and the Chernoff tail utility.

An experiment sweeps ``n`` (and seeds), builds one formula per point, runs a
prover and writes one CSV row per instance.  Jobs are enumerated in
``(n, seed)`` order and results are collected in job order, so the file does
not depend on the number of workers.  ``wall_ms`` is the only column
allowed to differ between reruns.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .errors import BudgetError, ParameterError, ParseError
from .formula import encode
from .graph import BipartiteGraph, read_graph, sample_random
from .pseudowidth import WeightProfile, pseudo_width
from .resolution import (
    DEFAULT_CLAUSE_BUDGET,
    DEFAULT_NODE_BUDGET,
    check_proof,
    prove_dp,
    prove_dpll,
    write_trace,
)

CSV_HEADER = "n,m,delta,seed,variant,solver,verdict,proof_length,pseudo_width,wall_ms"
VERDICTS = ("sat", "unsat", "budget")


def chernoff_bound(mu, dev):
    """``2 exp(-dev^2 / (2 mu + dev))``: tail bound for ``|X - mu| >= dev``.

    Not clamped; a value above 1 is vacuous (see :func:`chernoff_report`).
    """
    mu, dev = Fraction(mu), Fraction(dev)
    if mu < 0 or dev < 0:
        raise ParameterError("mu and dev must be non-negative")
    if mu == 0 and dev == 0:
        return 2.0
    return 2 * math.exp(-float(dev * dev / (2 * mu + dev)))


def chernoff_report(mu, dev):
    """Bound clamped to a probability."""
    return min(1.0, chernoff_bound(mu, dev))


# ---------------------------------------------------------------------------
# config files


def parse_config(text):
    """Flat ``key = value`` lines; ``#`` starts a comment, blank lines are skipped."""
    out = {}
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {raw!r}", no)
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ParseError("empty key", no)
        out[key.replace("-", "_")] = value
    return out


def read_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def parse_int_list(text):
    """``"3..7"``, ``"1,2,5"`` or a mix like ``"1,4..6"``."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            a, b = (int(x) for x in part.split("..", 1))
            if a > b:
                raise ParameterError(f"empty range {part!r}")
            out.extend(range(a, b + 1))
        else:
            out.append(int(part))
    return tuple(out)


# ---------------------------------------------------------------------------
# experiments


@dataclass(frozen=True)
class ExperimentSpec:
    variant: str = "php"
    family: str = "complete"  # complete: K_{n+m_offset, n}; random: G(n+m_offset, n, delta); file
    ns: tuple = (3, 4, 5, 6, 7)  # empty means an empty sweep
    graph_files: tuple = ()  # family "file": one instance per file and seed, n taken from the graph
    m_offset: int = 1
    delta: int | None = None
    seeds: tuple = (0,)
    solver: str = "dpll"
    node_budget: int = DEFAULT_NODE_BUDGET
    clause_budget: int = DEFAULT_CLAUSE_BUDGET
    width_slack: Fraction | None = None  # profile d_i = deg(i), delta_i = slack
    keep_proofs: str | None = None
    workers: int = 1
    out_csv: str = "results.csv"
    out_plot: str | None = None

    def __post_init__(self):
        if self.variant not in ("php", "fphp", "pm"):
            raise ParameterError(f"unknown variant {self.variant!r}")
        if self.family not in ("complete", "random", "file"):
            raise ParameterError(f"unknown graph family {self.family!r}")
        if self.solver not in ("dpll", "dp"):
            raise ParameterError(f"unknown solver {self.solver!r}")
        if self.family == "random" and not self.delta:
            raise ParameterError("random graphs need delta")
        if self.family == "file" and not self.graph_files:
            raise ParameterError("file family needs graph_files")
        if not self.seeds:
            raise ParameterError("seed list is empty")
        if self.node_budget < 1 or self.clause_budget < 1 or self.workers < 1:
            raise ParameterError("budgets and worker count must be positive")

    def points(self):
        """``(n, seed, path)`` triples in canonical order; ``path`` is None unless family is file."""
        seeds = sorted(set(self.seeds))
        if self.family == "file":
            sized = sorted((read_graph(p).n, p) for p in self.graph_files)
            return [(n, s, p) for n, p in sized for s in seeds]
        return [(n, s, None) for n in sorted(set(self.ns)) for s in seeds]

    def graph(self, n, seed, path=None):
        if path is not None:
            return read_graph(path)
        m = n + self.m_offset
        if self.family == "complete":
            return BipartiteGraph.complete(m, n)
        return sample_random(m, n, self.delta, seed)


@dataclass(frozen=True)
class ResultRow:
    n: int
    m: int
    delta: int
    seed: int
    variant: str
    solver: str
    verdict: str
    proof_length: int | None
    pseudo_width: int | None
    wall_ms: int

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ParameterError(f"bad verdict {self.verdict!r}")
        if (self.proof_length is not None) != (self.verdict == "unsat"):
            raise ParameterError("proof_length is present exactly for unsat rows")

    def csv_line(self):
        vals = [self.n, self.m, self.delta, self.seed, self.variant, self.solver, self.verdict,
                self.proof_length, self.pseudo_width, self.wall_ms]
        return ",".join("" if v is None else str(v) for v in vals)


def proof_path(spec, n, seed, path=None):
    tag = f"-{os.path.splitext(os.path.basename(path))[0]}" if path else ""
    return os.path.join(spec.keep_proofs, f"{spec.variant}-n{n}{tag}-s{seed}.trc")


def run_point(spec, n, seed, path=None):
    """One instance; budget exhaustion becomes a ``budget`` row."""
    g = spec.graph(n, seed, path)
    f = encode(g, spec.variant)
    t0 = time.perf_counter()
    try:
        if spec.solver == "dpll":
            res = prove_dpll(f, seed=seed, node_budget=spec.node_budget)
        else:
            res = prove_dp(f, clause_budget=spec.clause_budget)
    except BudgetError:
        res = None
    ms = int(round((time.perf_counter() - t0) * 1000))
    length = width = None
    if res is None:
        verdict = "budget"
    elif res.unsat:
        verdict = "unsat"
        length = res.proof.length
        if spec.width_slack is not None and spec.variant != "pm":
            degs = [g.degree(i) for i in g.pigeons]
            prof = WeightProfile(degs, [spec.width_slack] * g.m)
            width = pseudo_width(g, res.proof, prof)
        if spec.keep_proofs:
            write_trace(res.proof, proof_path(spec, n, seed, path))
    else:
        verdict = "sat"
    return ResultRow(n, g.m, g.delta_max, seed, spec.variant, spec.solver, verdict, length, width, ms)


def _run_point(args):
    return run_point(*args)


def plot_description(spec, csv_name):
    """Declarative plot: proof length (log scale) against n, one series per solver."""
    return {
        "data": csv_name,
        "format": "csv",
        "filter": {"verdict": "unsat"},
        "x": {"field": "n", "scale": "linear", "label": "n"},
        "y": {"field": "proof_length", "scale": "log", "label": "refutation length"},
        "series": ["variant", "solver"],
        "mark": "line+point",
        "title": f"{spec.variant} refutation length vs n",
    }


def run_experiment(spec):
    """Run the sweep; returns the sorted rows.

    Output files are opened before any solving, so an unwritable path fails
    immediately with :class:`OSError`.
    """
    if spec.keep_proofs:
        os.makedirs(spec.keep_proofs, exist_ok=True)
    with open(spec.out_csv, "w", encoding="utf-8", newline="\n") as csv_fh:
        plot_fh = open(spec.out_plot, "w", encoding="utf-8", newline="\n") if spec.out_plot else None
        try:
            jobs = [(spec, n, s, p) for n, s, p in spec.points()]
            if spec.workers > 1 and len(jobs) > 1:
                with ProcessPoolExecutor(spec.workers) as pool:
                    rows = list(pool.map(_run_point, jobs))
            else:
                rows = [_run_point(j) for j in jobs]
            # jobs are already canonical and map() preserves order
            csv_fh.write(CSV_HEADER + "\n")
            for r in rows:
                csv_fh.write(r.csv_line() + "\n")
            if plot_fh:
                json.dump(plot_description(spec, os.path.basename(spec.out_csv)), plot_fh, indent=2, sort_keys=True)
                plot_fh.write("\n")
        finally:
            if plot_fh:
                plot_fh.close()
    return rows


def parse_results(text):
    """CSV text back to rows (header must match exactly)."""
    lines = text.split("\n")
    if not lines or lines[0] != CSV_HEADER:
        raise ParseError("unexpected CSV header", 1)
    rows = []
    for no, line in enumerate(lines[1:], 2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 10:
            raise ParseError("expected 10 fields", no)

        def num(s):
            return int(s) if s else None

        try:
            rows.append(ResultRow(int(parts[0]), int(parts[1]), int(parts[2]), int(parts[3]), parts[4],
                                  parts[5], parts[6], num(parts[7]), num(parts[8]), int(parts[9])))
        except (ValueError, ParameterError) as e:
            raise ParseError(str(e), no) from None
    return rows


def verify_kept_proofs(spec, rows):
    """Every unsat row has a checker-accepted trace on disk."""
    from .resolution import read_trace

    bad = []
    for (n, seed, path), r in zip(spec.points(), rows):
        if r.verdict != "unsat":
            continue
        f = encode(spec.graph(n, seed, path), spec.variant)
        pi = read_trace(proof_path(spec, n, seed, path))
        if not check_proof(f, pi):
            bad.append((n, seed))
    return bad
