"""Command-line front end.

Exit codes: 0 success, 1 internal-consistency violation, 2 configuration
or validation error, 3 capacity error.
"""
import argparse
import csv
import datetime
import io
import json
import os
import sys

import numpy as np

from . import __version__
from ._accel import set_threads
from .builtins import BUILTINS
from .errors import CapacityError, InternalConsistencyError, InvalidInputError
from .game import load_game
from .lift import error_budget, lift_flow
from .meanfield import check_mff, flow_marginals_full, mf_bellman
from .mfe import solve_mfe
from .moduli import Modulus
from .nplayer import PolicyProfile, np_regret_all
from .regret import mf_regret, terminal_values
from .sim import concentration, empirical_gap

SUBCOMMANDS = {
    "regret": "exact N-player regrets, lifted MFR and error budgets",
    "lift": "lifted mean field flow and its error budgets",
    "mfe": "search for a mean field equilibrium and certify it",
    "simulate": "Monte Carlo gap between empirical and lifted flows",
    "concentration": "Monte Carlo BL concentration of empirical measures",
    "example": "run a built-in game end to end",
    "validate": "audit declared moduli and evaluator assumptions",
}


def _parser():
    p = argparse.ArgumentParser(prog="mfregret", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, about in SUBCOMMANDS.items():
        s = sub.add_parser(name, help=about, description=about)
        if name == "example":
            s.add_argument("name", choices=sorted(BUILTINS))
        else:
            src = s.add_mutually_exclusive_group(required=True)
            src.add_argument("--config", help="path to a JSON game config")
            src.add_argument("--example", choices=sorted(BUILTINS), help="built-in game name")
        s.add_argument("--n", type=int, nargs="+", default=None, help="player counts")
        s.add_argument("--reps", type=int, default=1000, help="Monte Carlo replications")
        s.add_argument("--seed", type=int, default=0, help="root seed for all random streams")
        s.add_argument("--tol", type=float, default=1e-6, help="solver MFR target")
        s.add_argument("--max-iter", type=int, default=500, help="solver iterations per restart")
        s.add_argument("--damping", type=float, default=0.2, help="solver step size in (0, 1]")
        s.add_argument("--restarts", type=int, default=1, help="solver restarts")
        s.add_argument("--threads", type=int, default=0, help="numba threads (0 keeps the default)")
        s.add_argument("--out", default="out", help="report directory")
        s.add_argument("--theta-zero", action="store_true", help="budgets with a zero policy modulus")
    return p


class Run:
    def __init__(self, args):
        self.args = args
        self.source = getattr(args, "config", None) or getattr(args, "example", None) or args.name
        self.manifest = {
            "command": args.command,
            "config": self.source,
            "seed": args.seed,
            "n": args.n,
            "reps": args.reps,
            "tol": args.tol,
            "max_iter": args.max_iter,
            "damping": args.damping,
            "restarts": args.restarts,
            "theta_zero": args.theta_zero,
            "out": args.out,
            "version": __version__,
            "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
        }
        self.tables = {}

    def game(self):
        a = self.args
        if getattr(a, "config", None):
            try:
                with open(a.config) as fh:
                    text = fh.read()
            except OSError as exc:
                raise InvalidInputError(f"cannot read config: {exc}") from None
            return load_game(text)
        return load_game(getattr(a, "example", None) or a.name)

    def table(self, name, columns, rows):
        """columns: list of (name, description)."""
        self.tables[name] = (columns, rows)

    def write(self, report):
        os.makedirs(self.args.out, exist_ok=True)
        body = {"manifest": self.manifest, "report": _jsonable(report)}
        with open(os.path.join(self.args.out, "report.json"), "w") as fh:
            json.dump(body, fh, indent=1, sort_keys=True)
            fh.write("\n")
        for name, (cols, rows) in self.tables.items():
            buf = io.StringIO()
            buf.write("# manifest: " + json.dumps(self.manifest, sort_keys=True) + "\n")
            for c, desc in cols:
                buf.write(f"# {c}: {desc}\n")
            w = csv.writer(buf, lineterminator="\n")
            w.writerow([c for c, _ in cols])
            for r in rows:
                w.writerow([_fmt(x) for x in r])
            with open(os.path.join(self.args.out, f"table_{name}.csv"), "w") as fh:
                fh.write(buf.getvalue())


def _fmt(x):
    if isinstance(x, float):
        return repr(x)
    return x


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        x = float(x)
        if x != x or x in (float("inf"), float("-inf")):
            return str(x)
        return x
    if isinstance(x, np.integer):
        return int(x)
    return x


def _profile(game, N):
    if game.profile:
        if len(game.profile) == N:
            return PolicyProfile(game.profile)
        if len(game.profile) == 1:
            return PolicyProfile.homogeneous(game.profile[0], N)
        raise InvalidInputError(f"config profile has {len(game.profile)} players, --n asked for {N}")
    if game.policy is None:
        raise InvalidInputError("config has no policy or profile (use {\"kind\": \"greedy\"} for the Bellman policy)")
    return PolicyProfile.homogeneous(game.policy, N)


def _theta(args):
    return Modulus.zero() if args.theta_zero else None


def cmd_regret(run, game, ns):
    args = run.args
    rows, per_n = [], []
    for N in ns:
        prof = _profile(game, N)
        players = []
        cache = {}
        for n in range(1, N + 1):
            key = id(prof[n - 1])
            if key not in cache:
                cache[key] = np_regret_all(game, None, prof, n)
            players.append(cache[key])
        flow = lift_flow(game, prof)
        mfr = mf_regret(game, None, flow)
        mfr_end = mf_regret(game, None, flow, "end")
        budget = error_budget(game, None, N, _theta(args), prof)
        avg = {m: float(np.mean([p[m] for p in players])) for m in ("stepwise", "end", "actual")}
        per_n.append({"N": N, "player_regrets": players, "avg_player_regret": avg["stepwise"],
                      "avg_player_regret_end": avg["end"], "avg_player_regret_actual": avg["actual"],
                      "mfr_lifted": mfr, "mfr_lifted_end": mfr_end, "gap": abs(avg["stepwise"] - mfr),
                      "budget": budget.to_dict()})
        for n, p in enumerate(players, 1):
            rows.append([N, n, p["stepwise"], p["end"], p["actual"], mfr, budget.E])
    run.table("regret", [("N", "number of players"), ("player", "player index (1-based)"),
                         ("stepwise", "exact stepwise regret"), ("end", "exact end regret"),
                         ("actual", "exact actual stepwise regret"),
                         ("mfr_lifted", "stepwise mean field regret of the lifted flow"),
                         ("E_budget", "error budget for the regret gap")], rows)
    return {"results": per_n}


def _flow_rows(flow):
    return [[t + 1, x, a, float(flow.joints[t, x, a])]
            for t in range(flow.joints.shape[0]) for x in range(flow.joints.shape[1])
            for a in range(flow.joints.shape[2])]


FLOW_COLS = [("t", "time step"), ("x", "state index"), ("a", "action index"),
             ("psi", "joint state-action mass")]


def _budget_rows(budgets):
    rows = []
    for b in budgets:
        for t, (e, eb) in enumerate(zip(b.e, b.e_bold), 1):
            rows.append([b.N, t, b.r, e, eb, b.E, b.E_script])
    return rows


BUDGET_COLS = [("N", "number of players"), ("t", "time step"), ("r", "concentration bound"),
               ("e", "propagated distance budget"), ("e_bold", "distance budget without policy modulus"),
               ("E", "stepwise regret gap budget"), ("E_script", "end regret gap budget")]


def cmd_lift(run, game, ns):
    out = []
    budgets = []
    flow = None
    for N in ns:
        prof = _profile(game, N)
        flow = lift_flow(game, prof)
        b = error_budget(game, None, N, _theta(run.args), prof)
        budgets.append(b)
        out.append({"N": N, "residuals": check_mff(game, flow), "mfr": mf_regret(game, None, flow),
                    "joints": flow.joints, "marginals": flow_marginals_full(game, flow),
                    "budget": b.to_dict()})
    run.table("flow", [("N", "number of players")] + FLOW_COLS,
              [[N] + r for N, o in zip(ns, out) for r in _flow_rows(lift_flow(game, _profile(game, N)))])
    run.table("budget", BUDGET_COLS, _budget_rows(budgets))
    return {"results": out}


def cmd_mfe(run, game, ns):
    a = run.args
    rep = solve_mfe(game, None, a.tol, a.max_iter, a.damping, a.restarts, a.seed)
    check = mf_regret(game, None, rep.flow)
    xi, VM = terminal_values(game, rep.flow)
    _, greedy = mf_bellman(game, None, xi, VM)
    run.table("flow", FLOW_COLS, _flow_rows(rep.flow))
    run.table("history", [("iteration", "solver iteration"), ("mfr", "mean field regret of the iterate")],
              [[i, float(m)] for i, m in enumerate(rep.history)])
    d = rep.to_dict()
    d["mfr_recheck"] = check
    d["greedy_policy"] = greedy.table
    return d


def cmd_simulate(run, game, ns):
    a = run.args
    rows, out = [], []
    for N in ns:
        prof = _profile(game, N)
        g = empirical_gap(game, prof, N, a.reps, a.seed)
        out.append({"N": N, "estimate": g.estimate, "se": g.se, "bound": g.bound})
        for t in range(len(g.estimate)):
            rows.append([N, t + 1, float(g.estimate[t]), float(g.se[t]), float(g.bound[t])])
    run.table("simulate", [("N", "number of players"), ("t", "time step"),
                           ("mean_bl", "mean BL distance of empirical joint to lifted flow"),
                           ("se", "standard error of mean_bl"), ("bound", "theoretical bound")], rows)
    return {"results": out}


def cmd_concentration(run, game, ns):
    a = run.args
    rows, out = [], []
    for N in ns:
        c = concentration(game.states, [game.initial] * N, max(a.reps, 100), a.seed)
        out.append(c.__dict__)
        rows.append([N, c.estimate, c.se, c.bound, c.j])
    run.table("concentration", [("N", "sample size"), ("estimate", "Monte Carlo mean BL distance"),
                                ("se", "standard error"), ("bound", "concentration bound"),
                                ("j", "grid index attaining the bound")], rows)
    return {"results": out}


def cmd_validate(run, game, ns):
    from .diagnostics import audit_game

    res = audit_game(game, samples=min(run.args.reps, 2000), seed=run.args.seed)
    run.table("validate", [("check", "audited property"), ("checked", "samples"),
                           ("violations", "samples beyond tolerance"), ("max_excess", "largest lhs - rhs")],
              [[k, v["checked"], v["violations"], v["max_excess"]] for k, v in sorted(res.items())])
    return {"checks": res, "ok": all(v["violations"] == 0 for v in res.values())}


def cmd_example(run, game, ns):
    report = {}
    if game.policy is not None or game.profile:
        report.update(cmd_regret(run, game, ns))
        first = report["results"][0]
        report["avg_player_regret"] = first["avg_player_regret"]
        report["mfr_lifted"] = first["mfr_lifted"]
        flow = lift_flow(game, _profile(game, ns[0]))
        xi, VM = terminal_values(game, flow)
        _, greedy = mf_bellman(game, None, xi, VM)
        report["optimal_policy_lifted"] = greedy.table
    else:
        report.update(cmd_mfe(run, game, ns))
    return report


COMMANDS = {"regret": cmd_regret, "lift": cmd_lift, "mfe": cmd_mfe, "simulate": cmd_simulate,
            "concentration": cmd_concentration, "validate": cmd_validate, "example": cmd_example}

DEFAULT_N = {"concentration": [10, 100, 1000], "simulate": [16, 256]}


def main(argv=None):
    args = _parser().parse_args(argv)
    if args.threads:
        set_threads(args.threads)
    ns = args.n or DEFAULT_N.get(args.command, [4])
    if any(n < 1 for n in ns):
        print("error: --n values must be positive", file=sys.stderr)
        return 2
    run = Run(args)
    try:
        game = run.game()
        report = COMMANDS[args.command](run, game, ns)
        run.write(report)
    except InternalConsistencyError as exc:
        print(f"internal consistency violation: {exc}", file=sys.stderr)
        return 1
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 3
    except InvalidInputError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.command == "validate" and not report["ok"]:
        print("validation: declared moduli violated on sampled inputs", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
