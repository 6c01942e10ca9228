"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data error, 3 bound violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import jacobi, oracle, spectral, tokens
from .exceptions import BoundViolation, OhmError
from .generators import FAMILIES, generate
from .graph import read_graph, serialize_graph
from .selfcheck import convergence_bound_holds, run_selfcheck

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_BOUND = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _emit(out: Path | None, name: str, text: str) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.mkdir(parents=True, exist_ok=True)
        with open(out / name, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _load_graph(args):
    if args.graph and args.family:
        raise UsageError("give either --graph or --family, not both")
    if args.graph:
        return read_graph(args.graph)
    if args.family:
        if args.n is None:
            raise UsageError("--family needs --n")
        return generate(args.family, args.n, p=args.p, wmin=args.wmin, wmax=args.wmax,
                        seed=args.seed or 0, source=args.source, sink=args.sink)
    raise UsageError("a graph is required: --graph FILE or --family NAME --n N")


def _require_seed(args):
    if args.seed is None:
        raise UsageError("--seed is mandatory for token runs")


# -- per-module payloads ---------------------------------------------------


def oracle_payload(g):
    p = oracle.solve_grounded(g)
    flows = oracle.edge_flows(g, p)
    return {
        "n": g.n,
        "source": g.source,
        "sink": g.sink,
        "p": p.tolist(),
        "energy": oracle.energy(g, p),
        "residual_inf": oracle.residual_inf(g, p),
        "neumann_gap": float(np.abs(oracle.neumann_potentials(g) - p).max()),
        "flows": [[u, v, flows[(u, v)]] for u, v, _ in g.edges],
    }


def spectral_payload(g):
    r = spectral.spectral_report(g)
    d = r.to_dict()
    d["all_pass"] = r.all_pass
    return d


def compare_report(g, args, traj, run):
    """Bound verdicts for a compare run.  ``verdicts`` gate the exit code;
    ``info`` is descriptive only."""
    p = oracle.solve_grounded(g)
    verdicts = {}

    def verdict(name, ok, **detail):
        verdicts[name] = {"pass": bool(ok), **detail}

    res = oracle.residual_inf(g, p)
    verdict("oracle_residual", res <= 1e-9 and p[g.sink] == 0, residual_inf=res)
    gap = float(np.abs(oracle.neumann_potentials(g) - p).max())
    verdict("oracle_neumann", gap <= 1e-8, gap=gap)

    verdict("jacobi_messages", all(s.messages_sent == 2 * g.m * s.t for s in traj),
            messages=traj[-1].messages_sent, rounds=traj[-1].t)
    if args.beta == 1.0:
        rows = list(jacobi.trajectory_rows(g, traj, p))
        e0 = rows[0][1]
        excess = max(err / e0 - bound for _, err, bound, _, _ in rows)
        verdict("jacobi_rate_bound", excess <= 1e-9, max_excess=excess)

    holds, worst = convergence_bound_holds(g, args.rounds)
    verdict("diffusion_rate_bound", holds, worst_ratio=worst)
    rho_u, rhs = spectral.perron_identity(g)
    verdict("perron_identity", abs(rho_u - rhs) <= 1e-9, gap=abs(rho_u - rhs))
    checks = [spectral.check_min_lambda(g)]
    if g.n <= spectral.MAX_EXACT_NODES:
        checks = [spectral.check_cheeger(g), spectral.check_lambda2_expansion(g)] + checks
    for c in checks:
        verdict(c.name, c.holds, lhs=c.lhs, rhs=c.rhs, vacuous=c.vacuous)
    exact, bound = tokens.token_count_bound(g, args.K, p)
    verdict("token_count_bound", exact <= bound, expected_tokens=exact, bound=bound)

    T = run.rounds
    phi = tokens.expected_iterates(g, T)[T]
    se = run.std_error()[T]
    dev = np.abs(run.mean()[T] - phi)
    z = np.divide(dev, se, out=np.zeros_like(dev), where=se > 0)
    info = {
        "unbiasedness_max_z": float(z.max()),
        "token_total_mean_last_round": float(run.counts[T].sum(axis=1).mean()),
    }
    return {
        "graph": {"n": g.n, "m": g.m, "source": g.source, "sink": g.sink},
        "params": {"rounds": args.rounds, "K": args.K, "beta": args.beta,
                   "seed": args.seed, "reps": args.reps, "stop_tol": args.stop_tol},
        "verdicts": verdicts,
        "info": info,
        "all_pass": all(v["pass"] for v in verdicts.values()),
    }


# -- subcommands -----------------------------------------------------------


def cmd_generate(args):
    g = _load_graph(args)
    _emit(args.out, f"{args.family or 'graph'}.txt", serialize_graph(g))
    return EXIT_OK


def cmd_oracle(args):
    _emit(args.out, "oracle.json", _dumps(oracle_payload(_load_graph(args))))
    return EXIT_OK


def cmd_jacobi(args):
    g = _load_graph(args)
    traj = jacobi.run_jacobi(g, args.rounds, beta=args.beta, stop_tol=args.stop_tol)
    _emit(args.out, "jacobi.csv", jacobi.trajectory_csv(g, traj))
    return EXIT_OK


def cmd_tokens(args):
    _require_seed(args)
    g = _load_graph(args)
    run = tokens.run_diffusion(g, args.K, args.rounds, args.seed, args.reps)
    if args.out is None:
        sys.stdout.write(run.to_json())
    else:
        _emit(args.out, "tokens.csv", run.to_csv())
        _emit(args.out, "tokens.json", run.to_json())
    return EXIT_OK


def cmd_spectral(args):
    payload = spectral_payload(_load_graph(args))
    _emit(args.out, "spectral.json", _dumps(payload))
    return EXIT_OK if payload["all_pass"] else EXIT_BOUND


def cmd_compare(args):
    _require_seed(args)
    g = _load_graph(args)
    traj = jacobi.run_jacobi(g, args.rounds, beta=args.beta, stop_tol=args.stop_tol)
    run = tokens.run_diffusion(g, args.K, args.rounds, args.seed, args.reps)
    report = compare_report(g, args, traj, run)
    if args.out is not None:
        _emit(args.out, "oracle.json", _dumps(oracle_payload(g)))
        _emit(args.out, "jacobi.csv", jacobi.trajectory_csv(g, traj))
        _emit(args.out, "tokens.csv", run.to_csv())
        _emit(args.out, "tokens.json", run.to_json())
        _emit(args.out, "spectral.json", _dumps(spectral_payload(g)))
    _emit(args.out, "report.json", _dumps(report))
    for name, v in report["verdicts"].items():
        print(f"{'PASS' if v['pass'] else 'FAIL'} {name}", file=sys.stderr)
    return EXIT_OK if report["all_pass"] else EXIT_BOUND


def cmd_selfcheck(args):
    graphs = None
    if args.graph or args.family:
        graphs = {"input": _load_graph(args)}
    results = run_selfcheck(graphs, inject_fault=args.inject_fault)
    failed = [r for r in results if not r.ok]
    for r in results:
        if args.verbose or not r.ok:
            print(r.line())
    if failed:
        first = failed[0]
        print(f"FAIL: first violated invariant: {first.name} on {first.graph}")
        return EXIT_BOUND
    print(f"PASS: {len(results)} checks on {len({r.graph for r in results})} graphs")
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "oracle": cmd_oracle,
    "jacobi": cmd_jacobi,
    "tokens": cmd_tokens,
    "spectral": cmd_spectral,
    "compare": cmd_compare,
    "selfcheck": cmd_selfcheck,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("graph")
    g.add_argument("--graph", type=Path, metavar="FILE", help="edge-list file")
    g.add_argument("--family", choices=FAMILIES, help="generated graph family")
    g.add_argument("--n", type=int, help="family size parameter")
    g.add_argument("--p", type=float, default=0.5, help="edge probability (random)")
    g.add_argument("--wmin", type=float, default=0.1)
    g.add_argument("--wmax", type=float, default=10.0)
    g.add_argument("--source", type=int)
    g.add_argument("--sink", type=int)
    r = common.add_argument_group("run")
    r.add_argument("--rounds", type=int, default=300, metavar="T")
    r.add_argument("--K", type=int, default=100)
    r.add_argument("--beta", type=float, default=1.0)
    r.add_argument("--seed", type=int, metavar="S")
    r.add_argument("--reps", type=int, default=20, metavar="R")
    r.add_argument("--stop-tol", type=float, default=1e-12, metavar="X")
    r.add_argument("--out", type=Path, metavar="DIR")

    parser = _Parser(prog="ohm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "selfcheck":
            sp.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
            sp.add_argument("-v", "--verbose", action="store_true")
    return parser


def _validate(args):
    if args.rounds < 0:
        raise UsageError("--rounds must be >= 0")
    if args.K < 1:
        raise UsageError("--K must be >= 1")
    if args.reps < 1:
        raise UsageError("--reps must be >= 1")
    if not 0 < args.beta <= 1:
        raise UsageError("--beta must lie in (0, 1]")
    if args.stop_tol < 0:
        raise UsageError("--stop-tol must be >= 0")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _validate(args)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"ohm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BoundViolation as exc:
        print(f"ohm: bound violation: {exc}", file=sys.stderr)
        return EXIT_BOUND
    except (OhmError, OSError) as exc:
        print(f"ohm: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
