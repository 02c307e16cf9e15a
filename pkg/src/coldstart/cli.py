"""Scenario runner CLI.

Subcommands: frontier, solve, budget, replay, heatmap, cohort, fit, stress,
serve.  Exit codes: 0 success, 2 input/schema error, 3 domain error,
4 internal error.  Output is canonical JSON or CSV ('.' decimals, LF line
endings, UTF-8) so runs diff cleanly.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from typing import Optional

import numpy as np

from . import __version__
from .budget import Budgets, LoopConfig, mb_dollar, mb_q, run_balanced_loop
from .engines import thompson_replay
from .equilibrium import (
    Policy,
    Scenario,
    implement_bounty,
    solve_best_response,
    solve_best_response_global,
    solve_first_best,
    targeting_compare,
)
from .errors import DomainError, FlatFrontierError, SchemaError
from .frontier import Binomial, BinomialBar, tail, slope, threshold_from_bar
from .presets import PRESET_NAMES, preset_document
from .scenario import (
    ScenarioDocument,
    budget_state_to_dict,
    equilibrium_to_dict,
    estimate_to_dict,
    first_best_to_dict,
    fit_to_dict,
    load_scenario_file,
    record_to_dict,
    to_json,
)
from .telemetry import (
    TelemetryRecord,
    fit_pass_curve,
    simulate_cohort,
    stress_bar,
)

BIND_ENV_VAR = "COLDSTART_BIND"
DEFAULT_BIND = "127.0.0.1:8000"


def _write_out(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def _fmt(value) -> str:
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return repr(value)
    return str(value)


def _load_document(args) -> ScenarioDocument:
    if getattr(args, "preset", None):
        return preset_document(args.preset, seed=getattr(args, "seed", None))
    if not getattr(args, "scenario", None):
        raise SchemaError("", "provide --scenario <path> or --preset <name>")
    seed = getattr(args, "seed", None)
    if seed is None:
        return load_scenario_file(args.scenario)
    # --seed replaces the document's top-level seed and any per-block seeds
    try:
        with open(args.scenario, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}")
    if isinstance(raw, dict):
        raw["seed"] = seed
        for block in ("engine", "cohort"):
            if isinstance(raw.get(block), dict):
                raw[block].pop("seed", None)
    from .scenario import parse_scenario_document

    return parse_scenario_document(raw)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def mu_grid(mu_min: float, mu_max: float, mu_step: float):
    return [float(m) for m in np.arange(mu_min, mu_max + 1e-12, mu_step)]


def cmd_frontier(args) -> int:
    doc = _load_document(args)
    model = doc.scenario.policy.pass_model
    grid = mu_grid(args.mu_min, args.mu_max, args.mu_step)
    rows = []
    for mu in grid:
        p = tail(model, mu)
        dp = slope(model, mu)
        lev = dp / p if 1e-12 < p < 1.0 - 1e-12 else float("nan")
        rows.append((mu, p, dp, lev))
    if args.format == "json":
        payload = {
            "rows": [
                {"mu": mu, "p": p, "p_prime": dp, "leverage": None if math.isnan(lev) else lev}
                for mu, p, dp, lev in rows
            ]
        }
        _write_out(to_json(payload), args.out)
    else:
        text = _csv_text(
            ["mu", "P", "Pprime", "Lambda"],
            [[_fmt(v) for v in row] for row in rows],
        )
        _write_out(text, args.out)
    return 0


def solve_payload(doc: ScenarioDocument, first_best: bool) -> dict:
    scen = doc.scenario
    rep = solve_best_response(scen.policy, scen.creator, scen.continuation)
    payload = {"equilibrium": equilibrium_to_dict(rep)}
    if 1e-12 < rep.p < 1.0 - 1e-12 and rep.p_prime > 0.0 and scen.policy.q > 0.0:
        cmp_ = targeting_compare(1.0, scen.policy, scen.creator, scen.continuation, rep.mu_star)
        payload["targeting"] = {
            "cost_bounty_per_unit": cmp_.cost_bounty,
            "cost_flat_per_unit": cmp_.cost_flat,
            "hit_dominates": cmp_.hit_dominates,
        }
    if first_best:
        fb = solve_first_best(scen.policy, scen.creator, scen.continuation)
        payload["first_best"] = first_best_to_dict(fb)
        if scen.creator.alpha >= 1.0:
            payload["bounty"] = {"b_star": 0.0, "expected_payout": 0.0}
        else:
            b_star = implement_bounty(scen.creator, scen.policy, scen.continuation, fb.mu_fb)
            payload["bounty"] = {
                "b_star": b_star,
                "expected_payout": b_star * fb.p,
            }
    return payload


def cmd_solve(args) -> int:
    doc = _load_document(args)
    first_best = args.first_best or args.preset == "fig3"
    _write_out(to_json(solve_payload(doc, first_best)), args.out)
    return 0


def budget_sweep_rows(doc: ScenarioDocument, q_max: int = 25, b_max: float = 60.0):
    """Marginal-value sweeps behind the equal-marginal-value figure.

    The q sweep rebuilds the bar at each integer window with s = ceil(mu_bar*q),
    which is where the kinks come from; the B sweep holds the bar fixed.
    """
    scen = doc.scenario
    model = scen.policy.pass_model
    if not isinstance(model, Binomial) or model.bar.mu_bar is None:
        raise DomainError("the budget sweep needs a binomial bar with mu_bar set")
    mu_bar = model.bar.mu_bar
    q_rows = []
    for q in range(1, q_max + 1):
        bar = BinomialBar(q=q, s=threshold_from_bar(q, mu_bar), mu_bar=mu_bar)
        s2 = Scenario(
            policy=Policy(q=float(q), pass_model=Binomial(bar), bounty=scen.policy.bounty),
            creator=scen.creator,
            continuation=scen.continuation,
        )
        rep = solve_best_response_global(s2.policy, s2.creator, s2.continuation)
        q_rows.append((q, bar.s, rep.mu_star, mb_q(s2, rep)))
    b_rows = []
    for b in np.arange(0.0, b_max + 1e-9, 1.0):
        s2 = scen.with_instruments(bounty=float(b))
        rep = solve_best_response_global(s2.policy, s2.creator, s2.continuation)
        b_rows.append((float(b), rep.mu_star, mb_dollar(s2, rep)))
    return q_rows, b_rows


def cmd_budget(args) -> int:
    doc = _load_document(args)
    if args.sweep or args.preset == "fig5":
        q_rows, b_rows = budget_sweep_rows(doc)
        if args.format == "json":
            payload = {
                "mbq_sweep": [
                    {"q": q, "s": s, "mu_star": m, "MBq": v} for q, s, m, v in q_rows
                ],
                "mbdollar_sweep": [
                    {"B": b, "mu_star": m, "MBdollar": v} for b, m, v in b_rows
                ],
            }
            _write_out(to_json(payload), args.out)
        else:
            text = _csv_text(
                ["sweep", "x", "s", "mu_star", "value"],
                [["MBq", _fmt(float(q)), s, _fmt(m), _fmt(v)] for q, s, m, v in q_rows]
                + [["MBdollar", _fmt(b), "", _fmt(m), _fmt(v)] for b, m, v in b_rows],
            )
            _write_out(text, args.out)
        return 0
    budgets = doc.budgets
    if args.R is not None and args.M is not None:
        budgets = Budgets(impressions=args.R, cash=args.M)
    if budgets is None:
        raise SchemaError("/budgets", "budget run needs budgets (file block or --R/--M)")
    config = doc.loop if doc.loop is not None else LoopConfig()
    if args.max_iter is not None:
        config = LoopConfig(
            eta_q=config.eta_q, eta_b=config.eta_b, rho=config.rho,
            smoothing=config.smoothing, bounty_cap=config.bounty_cap,
            tol=config.tol, max_iter=args.max_iter,
            q_move_cap=config.q_move_cap, b_move_frac=config.b_move_frac,
        )
    result = run_balanced_loop(doc.scenario, budgets, config)
    header = [
        "iter", "q", "B", "mu_star", "P", "Pprime", "MBq", "MBdollar",
        "lambda_imp", "lambda_dollar", "rq", "rdollar", "welfare",
    ]
    csv_text = _csv_text(
        header, [[_fmt(row[k]) for k in header] for row in result.trajectory]
    )
    if args.trajectory_out:
        _write_out(csv_text, args.trajectory_out)
    payload = {
        "state": budget_state_to_dict(result.state),
        "converged": result.converged,
        "iterations": result.state.iteration,
        "events": [list(e) for e in result.events],
    }
    if args.format == "csv" and not args.trajectory_out:
        _write_out(csv_text, args.out)
    else:
        _write_out(to_json(payload), args.out)
    return 0


def cmd_replay(args) -> int:
    doc = _load_document(args)
    if doc.engine is None:
        raise SchemaError("/engine", "replay needs an engine block in the scenario")
    model = doc.scenario.policy.pass_model
    if not isinstance(model, Binomial):
        raise DomainError("replay classifies by a binomial bar; use a binomial pass model")
    rep = solve_best_response(doc.scenario.policy, doc.scenario.creator, doc.scenario.continuation)
    mu = args.mu if args.mu is not None else rep.mu_star
    est = thompson_replay(mu, model.bar, doc.engine, time_budget_s=args.time_budget)
    payload = estimate_to_dict(est)
    payload["mu"] = mu
    _write_out(to_json(payload), args.out)
    return 0


def heatmap_rows(doc: ScenarioDocument, q_range, s_range):
    scen = doc.scenario
    rows = []
    for q in q_range:
        for s in s_range:
            if not 1 <= s <= q:
                continue
            s2 = Scenario(
                policy=Policy(
                    q=float(q),
                    pass_model=Binomial(BinomialBar(q=q, s=s)),
                    bounty=scen.policy.bounty,
                ),
                creator=scen.creator,
                continuation=scen.continuation,
            )
            flag = ""
            try:
                rep = solve_best_response(s2.policy, s2.creator, s2.continuation)
                mu = rep.mu_star
                lev = rep.leverage
                if rep.corner != "interior":
                    flag = f"corner_{rep.corner}"
                    lev = float("nan")
                elif math.isnan(lev):
                    flag = "degenerate_pass_rate"
            except DomainError as exc:
                mu, lev, flag = float("nan"), float("nan"), exc.code
            rows.append((q, s, mu, lev, flag))
    return rows


def _parse_range(text: str, name: str):
    try:
        lo, hi = text.split(":")
        lo, hi = int(lo), int(hi)
        if hi < lo:
            raise ValueError
        return range(lo, hi + 1)
    except ValueError:
        raise SchemaError(f"/{name}", f"expected 'lo:hi' with lo <= hi, got {text!r}")


def cmd_heatmap(args) -> int:
    doc = _load_document(args)
    q_range = _parse_range(args.q_range, "q-range")
    s_range = _parse_range(args.s_range, "s-range")
    rows = heatmap_rows(doc, q_range, s_range)
    if args.format == "json":
        payload = {
            "cells": [
                {
                    "q": q,
                    "s": s,
                    "mu_star": None if math.isnan(mu) else mu,
                    "leverage": None if math.isnan(lev) else lev,
                    "flag": flag,
                }
                for q, s, mu, lev, flag in rows
            ]
        }
        _write_out(to_json(payload), args.out)
    else:
        text = _csv_text(
            ["q", "s", "mu_star", "leverage", "flag"],
            [[q, s, _fmt(mu), _fmt(lev), flag] for q, s, mu, lev, flag in rows],
        )
        _write_out(text, args.out)
    return 0


def cmd_cohort(args) -> int:
    doc = _load_document(args)
    if doc.cohort is None:
        raise SchemaError("/cohort", "cohort simulation needs a cohort block")
    records = simulate_cohort(doc.cohort)
    if args.format == "json":
        lines = [json.dumps(record_to_dict(r), sort_keys=True) for r in records]
        _write_out("\n".join(lines) + "\n", args.out)
    else:
        n_slots = len(records[0].outcomes) if records else 0
        header = ["id", "proxy", "S", "pass"] + [f"y_{t+1}" for t in range(n_slots)]
        rows = [
            [r.entrant_id, _fmt(r.proxy), r.successes, int(r.passed), *r.outcomes]
            for r in records
        ]
        _write_out(_csv_text(header, rows), args.out)
    return 0


def _records_from_csv(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        records = []
        for row in reader:
            outcome_keys = sorted(
                (k for k in row if k.startswith("y_")), key=lambda k: int(k[2:])
            )
            outcomes = tuple(int(row[k]) for k in outcome_keys)
            records.append(
                TelemetryRecord(
                    entrant_id=int(row["id"]),
                    mu=float(row.get("mu", "nan") or "nan"),
                    proxy=float(row["proxy"]),
                    outcomes=outcomes,
                    successes=int(row["S"]),
                    passed=row["pass"] in ("1", "true", "True"),
                )
            )
    return records


def cmd_fit(args) -> int:
    if not args.records:
        raise SchemaError("/records", "fit needs --records <csv>")
    records = _records_from_csv(args.records)
    fit = fit_pass_curve(records, bandwidth=args.bandwidth)
    _write_out(to_json(fit_to_dict(fit)), args.out)
    return 0


def cmd_stress(args) -> int:
    doc = _load_document(args)
    model = doc.scenario.policy.pass_model
    if not isinstance(model, Binomial):
        raise DomainError("stress table needs a binomial pass model")
    if args.mu is not None:
        mu = args.mu
    else:
        rep = solve_best_response(
            doc.scenario.policy, doc.scenario.creator, doc.scenario.continuation
        )
        mu = rep.mu_star
    rows = stress_bar(model.bar, mu)
    payload = {
        "mu": mu,
        "rows": [
            {
                "dq": r.dq, "ds": r.ds, "q": r.q, "s": r.s,
                "p": r.p, "p_prime": r.p_prime,
                "leverage": None if math.isnan(r.leverage) else r.leverage,
            }
            for r in rows
        ],
    }
    _write_out(to_json(payload), args.out)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    bind = args.bind or os.environ.get(BIND_ENV_VAR, DEFAULT_BIND)
    host, _, port = bind.rpartition(":")
    uvicorn.run(create_app(), host=host or "127.0.0.1", port=int(port))
    return 0


# ---------------------------------------------------------------------------
# argument plumbing
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser, preset: bool = True) -> None:
    p.add_argument("--scenario", help="path to a scenario JSON document")
    if preset:
        p.add_argument("--preset", choices=PRESET_NAMES, help="built-in figure preset")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--format", choices=("json", "csv"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coldstart",
        description="Creator cold-start policy toolkit: frontiers, equilibria, bounties, budgets.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("frontier", help="grid of (mu, P, P', leverage)")
    _add_common(p)
    p.add_argument("--mu-min", type=float, default=0.01)
    p.add_argument("--mu-max", type=float, default=0.99)
    p.add_argument("--mu-step", type=float, default=0.01)
    p.set_defaults(func=cmd_frontier)

    p = sub.add_parser("solve", help="equilibrium report (optionally first best + bounty)")
    _add_common(p)
    p.set_defaults(format="json")
    p.add_argument("--first-best", action="store_true")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("budget", help="balanced exploration loop or marginal-value sweep")
    _add_common(p)
    p.add_argument("--sweep", action="store_true", help="emit the MB sweeps instead of running the loop")
    p.add_argument("--R", type=float, help="impression budget override")
    p.add_argument("--M", type=float, help="cash budget override")
    p.add_argument("--max-iter", type=int)
    p.add_argument("--trajectory-out", help="write the trajectory CSV here")
    p.set_defaults(func=cmd_budget)

    p = sub.add_parser("replay", help="Thompson continuation replay")
    _add_common(p)
    p.set_defaults(format="json")
    p.add_argument("--mu", type=float, help="entrant quality (default: solved mu*)")
    p.add_argument("--time-budget", type=float, help="wall-clock cap in seconds")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("heatmap", help="leverage at the induced equilibrium over (q, s)")
    _add_common(p)
    p.add_argument("--q-range", default="2:16")
    p.add_argument("--s-range", default="1:8")
    p.set_defaults(func=cmd_heatmap)

    p = sub.add_parser("cohort", help="simulate a synthetic telemetry cohort")
    _add_common(p)
    p.set_defaults(func=cmd_cohort)

    p = sub.add_parser("fit", help="fit a monotone pass curve from a records CSV")
    _add_common(p, preset=False)
    p.set_defaults(format="json")
    p.add_argument("--records", help="records CSV produced by the cohort command")
    p.add_argument("--bandwidth", type=float)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("stress", help="frontier quantities at neighboring bars")
    _add_common(p)
    p.set_defaults(format="json")
    p.add_argument("--mu", type=float, help="evaluation quality (default: solved mu*)")
    p.set_defaults(func=cmd_stress)

    p = sub.add_parser("serve", help="run the HTTP what-if service")
    p.add_argument("--bind", help=f"host:port (default ${BIND_ENV_VAR} or {DEFAULT_BIND})")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        sys.stderr.write(f"input error at {exc.pointer or '/'}: {exc}\n")
        return 2
    except DomainError as exc:
        sys.stderr.write(f"domain error [{exc.code}]: {exc}\n")
        return 3
    except BrokenPipeError:
        return 0
    except Exception as exc:  # pragma: no cover
        sys.stderr.write(f"internal error: {type(exc).__name__}: {exc}\n")
        return 4


if __name__ == "__main__":
    sys.exit(main())
