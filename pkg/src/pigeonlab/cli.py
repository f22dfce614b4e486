"""Command line interface: ``pigeonlab <subcommand> [options]``.

Every subcommand accepts ``--seed``, ``--out`` and ``--config FILE``.  The
config file is flat ``key = value`` text using the long option names
(``node-budget = 5000``); options given on the command line win.

Exit codes follow the prover/checker convention: 0 valid or sat, 1 invalid
proof or failed validation, 2 refutation produced, 3 budget exhausted,
4 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import closure as CL
from . import graph as G
from . import harness as H
from . import matchinglab as ML
from . import pseudowidth as PW
from . import spanlab as SL
from .errors import BudgetError, ParseError, PigeonlabError
from .formula import CnfFormula, encode, read_dimacs, write_dimacs
from .resolution import check_proof, prove_dp, prove_dpll, read_trace, write_trace
from .rng import Stream

EXIT_OK, EXIT_INVALID, EXIT_UNSAT, EXIT_BUDGET, EXIT_USAGE = 0, 1, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _frac(text):
    return Fraction(text)


def _bool(text):
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def _emit(args, text):
    """Print to stdout, or write to ``--out`` when given."""
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def _graph_args(p, with_file=True):
    p.add_argument("--graph", choices=["random", "complete", "file"], default="random")
    if with_file:
        p.add_argument("--graph-file")
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--delta", type=int)


def _load_graph(args):
    if args.graph == "file":
        if not args.graph_file:
            raise PigeonlabError("--graph file needs --graph-file")
        return G.read_graph(args.graph_file)
    if args.m is None or args.n is None:
        raise PigeonlabError("--m and --n are required")
    if args.graph == "complete":
        return G.BipartiteGraph.complete(args.m, args.n)
    if args.delta is None:
        raise PigeonlabError("random graphs need --delta")
    return G.sample_random(args.m, args.n, args.delta, args.seed)


def _int_set(text):
    return [int(x) for x in text.replace(",", " ").split()] if text else []


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen(args):
    g = _load_graph(args)
    f = encode(g, args.variant)
    if args.graph_out:
        G.write_graph(g, args.graph_out)
    if args.out:
        write_dimacs(f, args.out, seed=args.seed if args.graph == "random" else None)
    else:
        write_dimacs(f, sys.stdout, seed=args.seed if args.graph == "random" else None)
    return EXIT_OK


def cmd_expansion(args):
    g = _load_graph(args)
    if args.mode == "exhaustive":
        rep = G.certify_boundary_expansion(g, args.r, args.c)
    else:
        rep = G.estimate_expansion_monte_carlo(g, args.r, args.c, args.trials, args.seed)
    lines = [
        f"mode {rep.mode}",
        f"r {rep.r} c {rep.c}",
        f"worst_ratio {rep.worst_ratio}",
        f"worst_set {' '.join(map(str, rep.worst_set))}",
        f"certified {str(rep.certified).lower()}",
    ]
    _emit(args, "\n".join(lines))
    return EXIT_OK if rep.certified else EXIT_INVALID


def cmd_closure(args):
    g = _load_graph(args)
    res = CL.closure(g, _int_set(args.t), args.r, args.nu, args.k_aug)
    lines = [
        f"closure {' '.join(map(str, sorted(res.closure_set)))}",
        f"size {len(res.closure_set)}",
        f"maximal_verified {str(res.maximal_verified).lower()}",
    ]
    _emit(args, "\n".join(lines))
    return EXIT_OK


def cmd_solve(args):
    f = read_dimacs(args.cnf)
    try:
        if args.solver == "dpll":
            res = prove_dpll(f, branching=args.branching, seed=args.seed, node_budget=args.node_budget)
        else:
            res = prove_dp(f, clause_budget=args.clause_budget)
    except BudgetError as e:
        print(f"s BUDGET ({e})")
        return EXIT_BUDGET
    if res.unsat:
        if args.out:
            write_trace(res.proof, args.out)
        print(f"s UNSATISFIABLE\nc proof_length {res.proof.length}")
        return EXIT_UNSAT
    model = " ".join(str(v if res.model.get(v) else -v) for v in range(1, f.num_vars + 1))
    print("s SATISFIABLE")
    print(f"v {model} 0" if model else "v 0")
    return EXIT_OK


def cmd_check(args):
    f = read_dimacs(args.cnf)
    try:
        pi = read_trace(args.trace)
    except ParseError as e:
        _emit(args, f"s NOT VERIFIED {e}")
        return EXIT_INVALID
    v = check_proof(f, pi, require_refutation=not args.allow_partial)
    if v:
        _emit(args, "s VERIFIED")
        return EXIT_OK
    _emit(args, f"s NOT VERIFIED line {v.line}: {v.reason}")
    return EXIT_INVALID


def cmd_width(args):
    g = _load_graph(args)
    pi = read_trace(args.trace)
    d = [g.degree(i) if args.d is None else args.d for i in g.pigeons]
    prof = PW.WeightProfile(d, [args.slack] * g.m)
    prof.validate(g)
    rows = PW.heavy_profile_rows(g, pi, prof)
    text = f"pseudo_width {PW.pseudo_width(g, pi, prof)}"
    if args.csv:
        text = PW.heavy_profile_csv(rows).rstrip("\n") + "\n" + text
    _emit(args, text)
    return EXIT_OK


def cmd_filter(args):
    rng = Stream(args.seed, "cli-filter")
    t = PW.filter_t(args.m, args.alpha)
    rvecs = [tuple(1 + rng.below(t + 1) for _ in range(args.m)) for _ in range(args.vectors)]
    res = PW.sample_filter_vector(rvecs, args.m, args.w0, args.alpha, args.seed,
                                  max_attempts=args.max_attempts, enforce_hypotheses=not args.no_hypotheses)
    lines = [f"accepted {str(res.accepted).lower()}", f"attempts {res.attempts}"]
    if res.vector:
        lines.append("vector " + " ".join(map(str, res.vector)))
    lines += [f"hypothesis {k}: {'ok' if ok else 'fails'}" for k, ok in res.hypotheses.items()]
    _emit(args, "\n".join(lines))
    return EXIT_OK if res.accepted else EXIT_INVALID


def cmd_span_verify(args):
    pre = SL.preset(seed=args.seed)
    ctx = pre.context()
    checked = bad = skipped = 0
    for s in range(args.derivations):
        for c0, c1, c, _ in SL.random_derivation(pre, args.steps, s):
            try:
                rep = SL.span_step_report(pre.g, c0, c1, c, pre.profile, pre.spaces, ctx)
            except (PigeonlabError, BudgetError):
                skipped += 1
                continue
            checked += 1
            bad += not rep.contained
    _emit(args, f"steps_checked {checked}\nskipped {skipped}\nviolations {bad}")
    return EXIT_OK if bad == 0 else EXIT_INVALID


def cmd_pm_verify(args):
    pre = ML.pm_preset(seed=args.seed)
    ctx = pre.context()
    base = ML.pm_span_suite(pre.g, pre.partition, pre.profile, pre.params, [], pre.xi, ctx=ctx)
    axioms = (base.axioms_checked, len(base.axiom_violations), base.bottom_full)
    hyp = base.right_degree
    no_axioms = CnfFormula(0, [])
    checked = skipped = 0
    viol = []
    for s in range(args.derivations):
        der = ML.random_pm_derivation(pre, args.steps, s)
        rep = ML.pm_span_suite(pre.g, pre.partition, pre.profile, pre.params, der, pre.xi, ctx=ctx,
                               formula=no_axioms)
        checked += rep.steps_checked
        skipped += len([k for k in rep.skipped if k[0][0] == "step"])
        viol += [(s, k, rep.witnesses[k]) for k in rep.step_violations]
    if args.partition_out:
        ML.write_partition(pre.partition, args.partition_out)
    lines = [
        f"bottom_full {str(axioms[2]).lower()}",
        f"axioms_checked {axioms[0]} violations {axioms[1]}",
        f"steps_checked {checked}",
        f"steps_skipped {skipped}",
        f"containment_violations {len(viol)}",
        f"right_degree min {hyp['min']} bound {hyp['bound']} holds {str(hyp['holds']).lower()}",
    ]
    lines += [f"violation derivation {s} step {k} starved {w}" for s, k, w in viol]
    _emit(args, "\n".join(lines))
    return EXIT_OK if not viol and axioms[1] == 0 and axioms[2] else EXIT_INVALID


def _decimal(x):
    if isinstance(x, Fraction):
        d = x.denominator
        while d % 2 == 0:
            d //= 2
        while d % 5 == 0:
            d //= 5
        if d == 1:
            s = f"{float(x):.12f}".rstrip("0").rstrip(".")
            return s
    return f"{float(x):.6g}"


def cmd_bounds(args):
    rep = PW.bound_calculator(args.m, args.n, args.delta, args.r, args.alpha, args.variant)
    lines = [_decimal(rep.value), f"exact {str(rep.exact).lower()}"]
    lines += [f"condition {k}: {'ok' if ok else 'fails'}" for k, ok in rep.conditions.items()]
    _emit(args, "\n".join(lines))
    return EXIT_OK


def cmd_experiment(args):
    spec = H.ExperimentSpec(
        variant=args.variant,
        family=args.family,
        ns=H.parse_int_list(args.ns),
        graph_files=tuple(args.graph_files.split(",")) if args.graph_files else (),
        m_offset=args.m_offset,
        delta=args.delta,
        seeds=H.parse_int_list(args.seeds) if args.seeds else (args.seed,),
        solver=args.solver,
        node_budget=args.node_budget,
        clause_budget=args.clause_budget,
        width_slack=args.width_slack,
        keep_proofs=args.keep_proofs,
        workers=args.workers,
        out_csv=args.out or "results.csv",
        out_plot=args.plot,
    )
    rows = H.run_experiment(spec)
    counts = {v: sum(r.verdict == v for r in rows) for v in H.VERDICTS}
    print(json.dumps({"rows": len(rows), **counts}, sort_keys=True))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser():
    parser = _Parser(prog="pigeonlab", description="Pigeonhole and perfect-matching resolution lab.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out")
        p.add_argument("--config")
        p.set_defaults(func=fn)
        return p

    p = add("gen", cmd_gen, "generate a CNF (DIMACS)")
    p.add_argument("--variant", choices=["php", "fphp", "pm"], default="php")
    _graph_args(p)
    p.add_argument("--graph-out")

    p = add("expansion", cmd_expansion, "certify or estimate boundary expansion")
    _graph_args(p)
    p.add_argument("--r", type=int, required=False, default=1)
    p.add_argument("--c", type=_frac, default=Fraction(1))
    p.add_argument("--mode", choices=["exhaustive", "monte-carlo"], default="exhaustive")
    p.add_argument("--trials", type=int, default=1000)

    p = add("closure", cmd_closure, "closure of a pigeon set")
    _graph_args(p)
    p.add_argument("--t", default="")
    p.add_argument("--r", type=int, default=4)
    p.add_argument("--nu", type=_frac, default=Fraction(1))
    p.add_argument("--k-aug", type=int)

    p = add("solve", cmd_solve, "run a prover; --out writes the TRACECHECK refutation")
    p.add_argument("--cnf", required=True)
    p.add_argument("--solver", choices=["dpll", "dp"], default="dpll")
    p.add_argument("--branching", choices=["max-occurrence", "fixed-order", "random"], default="max-occurrence")
    p.add_argument("--node-budget", type=int, default=H.DEFAULT_NODE_BUDGET)
    p.add_argument("--clause-budget", type=int, default=H.DEFAULT_CLAUSE_BUDGET)

    p = add("check", cmd_check, "check a TRACECHECK proof against a CNF")
    p.add_argument("--cnf", required=True)
    p.add_argument("--trace", required=True)
    p.add_argument("--allow-partial", type=_bool, nargs="?", const=True, default=False)

    p = add("width", cmd_width, "pseudo-width of a proof")
    _graph_args(p)
    p.add_argument("--trace", required=True)
    p.add_argument("--d", type=int)
    p.add_argument("--slack", type=_frac, default=Fraction(1))
    p.add_argument("--csv", type=_bool, nargs="?", const=True, default=False)

    p = add("filter", cmd_filter, "sample a filter vector for random r-vectors")
    p.add_argument("--m", type=int, default=64)
    p.add_argument("--alpha", type=int, default=2)
    p.add_argument("--w0", type=int, default=9)
    p.add_argument("--vectors", type=int, default=64)
    p.add_argument("--max-attempts", type=int, default=200)
    p.add_argument("--no-hypotheses", type=_bool, nargs="?", const=True, default=False)

    p = add("span-verify", cmd_span_verify, "FPHP span containment sweep on the preset")
    p.add_argument("--derivations", type=int, default=20)
    p.add_argument("--steps", type=int, default=8)

    p = add("pm-verify", cmd_pm_verify, "perfect-matching span suite on the preset")
    p.add_argument("--derivations", type=int, default=25)
    p.add_argument("--steps", type=int, default=8)
    p.add_argument("--partition-out")

    p = add("bounds", cmd_bounds, "evaluate the length-bound exponent")
    p.add_argument("--variant", choices=["fphp", "pm"], default="fphp")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--delta", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--alpha", type=int, required=True)

    p = add("experiment", cmd_experiment, "run a sweep and write CSV plus a plot description")
    p.add_argument("--variant", choices=["php", "fphp", "pm"], default="php")
    p.add_argument("--family", choices=["complete", "random", "file"], default="complete")
    p.add_argument("--graph-files", help="comma-separated graph files (family file)")
    p.add_argument("--ns", default="3..7")
    p.add_argument("--m-offset", type=int, default=1)
    p.add_argument("--delta", type=int)
    p.add_argument("--seeds")
    p.add_argument("--solver", choices=["dpll", "dp"], default="dpll")
    p.add_argument("--node-budget", type=int, default=H.DEFAULT_NODE_BUDGET)
    p.add_argument("--clause-budget", type=int, default=H.DEFAULT_CLAUSE_BUDGET)
    p.add_argument("--width-slack", type=_frac)
    p.add_argument("--keep-proofs")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--plot")
    return parser, sub


def _config_path(argv):
    for k, tok in enumerate(argv):
        if tok == "--config" and k + 1 < len(argv):
            return argv[k + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def _apply_config(parser, sub, argv):
    """Install config values as subparser defaults, then parse (flags still win)."""
    argv = list(sys.argv[1:] if argv is None else argv)
    path = _config_path(argv)
    command = next((tok for tok in argv if tok in sub.choices), None)
    if path and command:
        cfg = H.read_config(path)
        sp = sub.choices[command]
        known = {a.dest: a for a in sp._actions}
        for key in cfg:
            if key not in known or key in ("config", "help"):
                parser.error(f"unknown config key {key!r} for {command}")
        # string defaults go through the option's type; options the config
        # supplies are no longer required on the command line
        for key in cfg:
            known[key].required = False
        sp.set_defaults(**cfg)
    return parser.parse_args(argv)


def main(argv=None):
    parser, sub = build_parser()
    try:
        args = _apply_config(parser, sub, argv)
        return args.func(args)
    except SystemExit as e:  # argparse usage errors and --help
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    except BudgetError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except (PigeonlabError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
