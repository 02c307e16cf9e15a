"""Stateless HTTP what-if service.

Every endpoint recomputes from the request body; the only state that exists
lives in the client (the budget loop round-trips its full state through
``/v1/budget/step``).  Schema violations return 400 with a JSON-pointer
path; domain failures return 422 with a stable machine-readable code;
responses reuse the CLI's canonical JSON rendering byte for byte.
"""

from __future__ import annotations

import json
import math
from typing import Any

from fastapi import FastAPI, Request, Response

from .budget import (
    Budgets,
    LoopConfig,
    kkt_residuals,
    primal_dual_step,
    run_balanced_loop,
)
from .cli import budget_sweep_rows, heatmap_rows, mu_grid, solve_payload
from .engines import thompson_replay
from .equilibrium import implement_bounty, solve_best_response, solve_first_best
from .errors import DomainError, SchemaError
from .frontier import Binomial, slope, tail
from .scenario import (
    ScenarioDocument,
    budget_state_from_dict,
    budget_state_to_dict,
    equilibrium_to_dict,
    estimate_to_dict,
    first_best_to_dict,
    fit_to_dict,
    parse_scenario_document,
    record_to_dict,
    to_json,
)
from .telemetry import TelemetryRecord, fit_pass_curve, simulate_cohort, stress_bar

__all__ = ["create_app"]


def _json_response(payload: Any, status_code: int = 200) -> Response:
    return Response(
        content=to_json(payload), status_code=status_code, media_type="application/json"
    )


def _schema_response(exc: SchemaError) -> Response:
    return _json_response(
        {"error": "schema_violation", "pointer": exc.pointer or "/", "message": str(exc)},
        status_code=400,
    )


def _domain_response(exc: DomainError) -> Response:
    return _json_response(
        {"error": "domain", "code": exc.code, "message": str(exc)},
        status_code=422,
    )


async def _body(request: Request) -> dict:
    raw = await request.body()
    try:
        doc = json.loads(raw or b"{}")
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}")
    if not isinstance(doc, dict):
        raise SchemaError("", "request body must be a JSON object")
    return doc


def _pop_scenario(doc: dict) -> tuple[ScenarioDocument, dict]:
    """Split a request into the scenario document and the extra op fields."""
    extras = {}
    scenario_fields = {"policy", "creator", "continuation", "budgets", "loop", "engine", "cohort", "seed"}
    scen_doc = {}
    for key, value in doc.items():
        (scen_doc if key in scenario_fields else extras)[key] = value
    return parse_scenario_document(scen_doc), extras


def create_app() -> FastAPI:
    app = FastAPI(title="coldstart policy service", docs_url=None, redoc_url=None)

    @app.exception_handler(SchemaError)
    async def _on_schema(_req, exc: SchemaError):
        return _schema_response(exc)

    @app.exception_handler(DomainError)
    async def _on_domain(_req, exc: DomainError):
        return _domain_response(exc)

    @app.post("/v1/solve")
    async def solve(request: Request):
        doc, extras = _pop_scenario(await _body(request))
        first_best = bool(extras.pop("first_best", False))
        if extras:
            raise SchemaError(f"/{sorted(extras)[0]}", "unknown field")
        return _json_response(solve_payload(doc, first_best))

    @app.post("/v1/first-best")
    async def first_best(request: Request):
        doc, extras = _pop_scenario(await _body(request))
        if extras:
            raise SchemaError(f"/{sorted(extras)[0]}", "unknown field")
        scen = doc.scenario
        fb = solve_first_best(scen.policy, scen.creator, scen.continuation)
        return _json_response(first_best_to_dict(fb))

    @app.post("/v1/bounty")
    async def bounty(request: Request):
        doc, extras = _pop_scenario(await _body(request))
        if extras:
            raise SchemaError(f"/{sorted(extras)[0]}", "unknown field")
        scen = doc.scenario
        fb = solve_first_best(scen.policy, scen.creator, scen.continuation)
        if scen.creator.alpha >= 1.0:
            payload = {"b_star": 0.0, "expected_payout": 0.0, "mu_fb": fb.mu_fb}
        else:
            b_star = implement_bounty(scen.creator, scen.policy, scen.continuation, fb.mu_fb)
            payload = {
                "b_star": b_star,
                "expected_payout": b_star * fb.p,
                "mu_fb": fb.mu_fb,
            }
        return _json_response(payload)

    @app.post("/v1/frontier")
    async def frontier_endpoint(request: Request):
        doc, extras = _pop_scenario(await _body(request))
        mu_min = float(extras.pop("mu_min", 0.01))
        mu_max = float(extras.pop("mu_max", 0.99))
        mu_step = float(extras.pop("mu_step", 0.01))
        if extras:
            raise SchemaError(f"/{sorted(extras)[0]}", "unknown field")
        if not (0.0 < mu_min <= mu_max < 1.0 and mu_step > 0.0):
            raise SchemaError("/mu_min", "need 0 < mu_min <= mu_max < 1 and mu_step > 0")
        model = doc.scenario.policy.pass_model
        rows = []
        for mu in mu_grid(mu_min, mu_max, mu_step):
            p = tail(model, mu)
            dp = slope(model, mu)
            lev = dp / p if 1e-12 < p < 1.0 - 1e-12 else float("nan")
            rows.append(
                {"mu": mu, "p": p, "p_prime": dp, "leverage": None if math.isnan(lev) else lev}
            )
        return _json_response({"rows": rows})

    @app.post("/v1/budget/run")
    async def budget_run(request: Request):
        doc, extras = _pop_scenario(await _body(request))
        if extras:
            raise SchemaError(f"/{sorted(extras)[0]}", "unknown field")
        if doc.budgets is None:
            raise SchemaError("/budgets", "missing required field")
        config = doc.loop if doc.loop is not None else LoopConfig()
        result = run_balanced_loop(doc.scenario, doc.budgets, config)
        return _json_response(
            {
                "state": budget_state_to_dict(result.state),
                "converged": result.converged,
                "iterations": result.state.iteration,
                "events": [list(e) for e in result.events],
                "trajectory": list(result.trajectory),
            }
        )

    @app.post("/v1/budget/step")
    async def budget_step(request: Request):
        doc, extras = _pop_scenario(await _body(request))
        if doc.budgets is None:
            raise SchemaError("/budgets", "missing required field")
        state_node = extras.pop("state", None)
        if extras:
            raise SchemaError(f"/{sorted(extras)[0]}", "unknown field")
        if state_node is None:
            raise SchemaError("/state", "missing required field")
        state = budget_state_from_dict(state_node)
        new_state = primal_dual_step(state, doc.scenario, doc.budgets)
        res = kkt_residuals(new_state, doc.scenario, doc.budgets)
        return _json_response(
            {
                "state": budget_state_to_dict(new_state),
                "residuals": {
                    "rq": res.r_q,
                    "rdollar": res.r_cash,
                    "dual_infeasibility": list(res.dual_infeasibility),
                },
            }
        )

    @app.post("/v1/replay")
    async def replay(request: Request):
        doc, extras = _pop_scenario(await _body(request))
        mu = extras.pop("mu", None)
        time_budget = extras.pop("time_budget_s", None)
        if extras:
            raise SchemaError(f"/{sorted(extras)[0]}", "unknown field")
        if doc.engine is None:
            raise SchemaError("/engine", "missing required field")
        model = doc.scenario.policy.pass_model
        if not isinstance(model, Binomial):
            raise SchemaError("/policy/pass_model", "replay needs a binomial pass model")
        if mu is None:
            rep = solve_best_response(
                doc.scenario.policy, doc.scenario.creator, doc.scenario.continuation
            )
            mu = rep.mu_star
        est = thompson_replay(
            float(mu), model.bar, doc.engine,
            time_budget_s=None if time_budget is None else float(time_budget),
        )
        payload = estimate_to_dict(est)
        payload["mu"] = float(mu)
        return _json_response(payload)

    @app.post("/v1/heatmap")
    async def heatmap(request: Request):
        doc, extras = _pop_scenario(await _body(request))
        q_lo = int(extras.pop("q_min", 2))
        q_hi = int(extras.pop("q_max", 16))
        s_lo = int(extras.pop("s_min", 1))
        s_hi = int(extras.pop("s_max", 8))
        if extras:
            raise SchemaError(f"/{sorted(extras)[0]}", "unknown field")
        if q_lo < 1 or q_hi < q_lo or s_lo < 1 or s_hi < s_lo:
            raise SchemaError("/q_min", "heatmap ranges must be positive and ordered")
        rows = heatmap_rows(doc, range(q_lo, q_hi + 1), range(s_lo, s_hi + 1))
        return _json_response(
            {
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
        )

    @app.post("/v1/budget/sweep")
    async def budget_sweep(request: Request):
        doc, extras = _pop_scenario(await _body(request))
        if extras:
            raise SchemaError(f"/{sorted(extras)[0]}", "unknown field")
        q_rows, b_rows = budget_sweep_rows(doc)
        return _json_response(
            {
                "mbq_sweep": [
                    {"q": q, "s": s, "mu_star": m, "MBq": v} for q, s, m, v in q_rows
                ],
                "mbdollar_sweep": [
                    {"B": b, "mu_star": m, "MBdollar": v} for b, m, v in b_rows
                ],
            }
        )

    @app.post("/v1/telemetry/simulate")
    async def telemetry_simulate(request: Request):
        doc, extras = _pop_scenario(await _body(request))
        if extras:
            raise SchemaError(f"/{sorted(extras)[0]}", "unknown field")
        if doc.cohort is None:
            raise SchemaError("/cohort", "missing required field")
        records = simulate_cohort(doc.cohort)
        return _json_response({"records": [record_to_dict(r) for r in records]})

    @app.post("/v1/telemetry/fit")
    async def telemetry_fit(request: Request):
        body = await _body(request)
        records_node = body.pop("records", None)
        bandwidth = body.pop("bandwidth", None)
        if body:
            raise SchemaError(f"/{sorted(body)[0]}", "unknown field")
        if not isinstance(records_node, list) or not records_node:
            raise SchemaError("/records", "expected a non-empty array of records")
        records = []
        for i, node in enumerate(records_node):
            if not isinstance(node, dict):
                raise SchemaError(f"/records/{i}", "expected an object")
            try:
                records.append(
                    TelemetryRecord(
                        entrant_id=int(node.get("id", i)),
                        mu=float(node.get("mu", float("nan"))),
                        proxy=float(node["proxy"]),
                        outcomes=tuple(int(y) for y in node.get("outcomes", ())),
                        successes=int(node["S"]),
                        passed=bool(node["pass"]),
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise SchemaError(f"/records/{i}", f"bad record: {exc}")
        fit = fit_pass_curve(records, bandwidth=bandwidth)
        return _json_response(fit_to_dict(fit))

    @app.post("/v1/stress")
    async def stress(request: Request):
        doc, extras = _pop_scenario(await _body(request))
        mu = extras.pop("mu", None)
        if extras:
            raise SchemaError(f"/{sorted(extras)[0]}", "unknown field")
        model = doc.scenario.policy.pass_model
        if not isinstance(model, Binomial):
            raise SchemaError("/policy/pass_model", "stress table needs a binomial pass model")
        if mu is None:
            rep = solve_best_response(
                doc.scenario.policy, doc.scenario.creator, doc.scenario.continuation
            )
            mu = rep.mu_star
        rows = stress_bar(model.bar, float(mu))
        return _json_response(
            {
                "mu": float(mu),
                "rows": [
                    {
                        "dq": r.dq, "ds": r.ds, "q": r.q, "s": r.s,
                        "p": r.p, "p_prime": r.p_prime,
                        "leverage": None if math.isnan(r.leverage) else r.leverage,
                    }
                    for r in rows
                ],
            }
        )

    return app
