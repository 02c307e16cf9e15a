"""Scenario documents: the JSON schema shared by the CLI and the service.

A scenario bundles policy, creator, and continuation primitives plus the
optional budget, engine, and cohort blocks.  Validation walks the document
with JSON-pointer paths so schema violations identify the exact field;
unknown fields are rejected everywhere.  Canonical serialization (sorted
keys, two-space indent, trailing newline) keeps CLI and service output
byte-identical.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Optional

from .budget import Budgets, BudgetState, LoopConfig
from .engines import ContinuationEstimate, EngineConfig
from .equilibrium import (
    ContinuationLandscape,
    CreatorPrimitives,
    EquilibriumReport,
    FirstBestReport,
    Policy,
    Scenario,
)
from .errors import ConfigurationError, InvalidInputError, SchemaError
from .frontier import pass_model_from_dict, pass_model_to_dict
from .telemetry import CohortSpec, PassCurveFit, QualityPrior, TelemetryRecord

__all__ = [
    "ScenarioDocument",
    "parse_scenario_document",
    "load_scenario_file",
    "to_json",
    "equilibrium_to_dict",
    "first_best_to_dict",
    "estimate_to_dict",
    "budget_state_to_dict",
    "budget_state_from_dict",
    "fit_to_dict",
    "record_to_dict",
]


@dataclass(frozen=True)
class ScenarioDocument:
    scenario: Scenario
    budgets: Optional[Budgets] = None
    loop: Optional[LoopConfig] = None
    engine: Optional[EngineConfig] = None
    cohort: Optional[CohortSpec] = None
    seed: Optional[int] = None


def _require_obj(node: Any, pointer: str) -> dict:
    if not isinstance(node, dict):
        raise SchemaError(pointer, f"expected an object, got {type(node).__name__}")
    return node


def _reject_unknown(node: dict, allowed: set, pointer: str) -> None:
    unknown = set(node) - allowed
    if unknown:
        raise SchemaError(
            f"{pointer}/{sorted(unknown)[0]}", "unknown field"
        )


def _num(node: dict, key: str, pointer: str, *, required=True, default=None,
         minimum=None, maximum=None, exclusive_min=None, integer=False):
    if key not in node:
        if required:
            raise SchemaError(f"{pointer}/{key}", "missing required field")
        return default
    v = node[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaError(f"{pointer}/{key}", f"expected a number, got {type(v).__name__}")
    if integer and not (isinstance(v, int) or float(v).is_integer()):
        raise SchemaError(f"{pointer}/{key}", f"expected an integer, got {v}")
    v = int(v) if integer else float(v)
    if isinstance(v, float) and not math.isfinite(v):
        raise SchemaError(f"{pointer}/{key}", "must be finite")
    if minimum is not None and v < minimum:
        raise SchemaError(f"{pointer}/{key}", f"must be >= {minimum}, got {v}")
    if exclusive_min is not None and v <= exclusive_min:
        raise SchemaError(f"{pointer}/{key}", f"must be > {exclusive_min}, got {v}")
    if maximum is not None and v > maximum:
        raise SchemaError(f"{pointer}/{key}", f"must be <= {maximum}, got {v}")
    return v


def _parse_pass_model(node: Any, pointer: str):
    node = _require_obj(node, pointer)
    if "kind" not in node:
        raise SchemaError(f"{pointer}/kind", "missing required field")
    try:
        return pass_model_from_dict(node)
    except (ConfigurationError, InvalidInputError, KeyError, TypeError) as exc:
        raise SchemaError(pointer, f"invalid pass model: {exc}") from exc


def _parse_policy(node: Any, pointer: str) -> Policy:
    node = _require_obj(node, pointer)
    _reject_unknown(node, {"q", "B", "pass_model"}, pointer)
    q = _num(node, "q", pointer, minimum=0.0)
    bounty = _num(node, "B", pointer, required=False, default=0.0, minimum=0.0)
    if "pass_model" not in node:
        raise SchemaError(f"{pointer}/pass_model", "missing required field")
    model = _parse_pass_model(node["pass_model"], f"{pointer}/pass_model")
    return Policy(q=q, pass_model=model, bounty=bounty)


def _parse_creator(node: Any, pointer: str) -> CreatorPrimitives:
    node = _require_obj(node, pointer)
    _reject_unknown(node, {"alpha", "kappa", "mu0", "mu_low", "mu_high"}, pointer)
    kwargs = dict(
        alpha=_num(node, "alpha", pointer, exclusive_min=0.0, maximum=1.0),
        kappa=_num(node, "kappa", pointer, exclusive_min=0.0),
        mu0=_num(node, "mu0", pointer, required=False, default=0.0),
    )
    if "mu_low" in node:
        kwargs["mu_low"] = _num(node, "mu_low", pointer, exclusive_min=0.0)
    if "mu_high" in node:
        kwargs["mu_high"] = _num(node, "mu_high", pointer, exclusive_min=0.0)
    try:
        return CreatorPrimitives(**kwargs)
    except InvalidInputError as exc:
        raise SchemaError(pointer, str(exc)) from exc


def _parse_continuation(node: Any, pointer: str) -> ContinuationLandscape:
    node = _require_obj(node, pointer)
    _reject_unknown(node, {"h0", "dh", "gamma"}, pointer)
    try:
        return ContinuationLandscape(
            h0=_num(node, "h0", pointer, required=False, default=0.0, minimum=0.0),
            dh=_num(node, "dh", pointer, minimum=0.0),
            gamma=_num(node, "gamma", pointer, required=False, default=0.9),
        )
    except InvalidInputError as exc:
        raise SchemaError(pointer, str(exc)) from exc


def _parse_budgets(node: Any, pointer: str) -> Budgets:
    node = _require_obj(node, pointer)
    _reject_unknown(node, {"R", "M"}, pointer)
    try:
        return Budgets(
            impressions=_num(node, "R", pointer, exclusive_min=0.0),
            cash=_num(node, "M", pointer, exclusive_min=0.0),
        )
    except InvalidInputError as exc:
        raise SchemaError(pointer, str(exc)) from exc


def _parse_loop(node: Any, pointer: str) -> LoopConfig:
    node = _require_obj(node, pointer)
    allowed = {
        "eta_q", "eta_b", "rho", "smoothing", "bounty_cap", "tol",
        "max_iter", "q_move_cap", "b_move_frac",
    }
    _reject_unknown(node, allowed, pointer)
    kwargs = {}
    for key in allowed:
        if key in node:
            if key == "max_iter":
                kwargs[key] = _num(node, key, pointer, minimum=1, integer=True)
            elif key == "bounty_cap":
                if node[key] is not None:
                    kwargs[key] = _num(node, key, pointer, exclusive_min=0.0)
            else:
                kwargs[key] = _num(node, key, pointer, minimum=0.0)
    try:
        return LoopConfig(**kwargs)
    except InvalidInputError as exc:
        raise SchemaError(pointer, str(exc)) from exc


def _parse_engine(node: Any, pointer: str, default_seed: Optional[int]) -> EngineConfig:
    node = _require_obj(node, pointer)
    allowed = {
        "prior_a", "prior_b", "competitors", "competitor_posteriors", "seats",
        "weights", "horizon", "gamma", "n_reps", "seed", "fixed_inclusion",
    }
    _reject_unknown(node, allowed, pointer)
    kwargs = dict(
        prior_a=_num(node, "prior_a", pointer, required=False, default=1.0, exclusive_min=0.0),
        prior_b=_num(node, "prior_b", pointer, required=False, default=1.0, exclusive_min=0.0),
        seats=_num(node, "seats", pointer, required=False, default=1, minimum=1, integer=True),
        gamma=_num(node, "gamma", pointer, required=False, default=0.95,
                   exclusive_min=0.0, maximum=1.0 - 1e-12),
        n_reps=_num(node, "n_reps", pointer, required=False, default=10_000,
                    minimum=1, integer=True),
    )
    if "competitors" in node:
        comp = node["competitors"]
        if not isinstance(comp, list):
            raise SchemaError(f"{pointer}/competitors", "expected an array")
        kwargs["competitors"] = tuple(float(c) for c in comp)
    if "competitor_posteriors" in node and node["competitor_posteriors"]:
        pairs = node["competitor_posteriors"]
        if not isinstance(pairs, list):
            raise SchemaError(f"{pointer}/competitor_posteriors", "expected an array")
        kwargs["competitor_posteriors"] = tuple((float(a), float(b)) for a, b in pairs)
    if "weights" in node:
        w = node["weights"]
        if not isinstance(w, list):
            raise SchemaError(f"{pointer}/weights", "expected an array")
        kwargs["weights"] = tuple(float(x) for x in w)
    else:
        kwargs["weights"] = tuple([1.0] * kwargs["seats"])
    if "horizon" in node and node["horizon"] is not None:
        kwargs["horizon"] = _num(node, "horizon", pointer, minimum=1, integer=True)
    seed = _num(node, "seed", pointer, required=False, default=None, minimum=0, integer=True)
    kwargs["seed"] = seed if seed is not None else (default_seed or 0)
    if "fixed_inclusion" in node and node["fixed_inclusion"] is not None:
        fi = node["fixed_inclusion"]
        if not isinstance(fi, list) or len(fi) != 2:
            raise SchemaError(f"{pointer}/fixed_inclusion", "expected [pi_pass, pi_fail]")
        kwargs["fixed_inclusion"] = (float(fi[0]), float(fi[1]))
    try:
        return EngineConfig(**kwargs)
    except InvalidInputError as exc:
        raise SchemaError(pointer, str(exc)) from exc


def _parse_cohort(node: Any, pointer: str, model, default_seed: Optional[int]) -> CohortSpec:
    node = _require_obj(node, pointer)
    _reject_unknown(node, {"n", "prior", "proxy", "seed"}, pointer)
    n = _num(node, "n", pointer, minimum=1, integer=True)
    if "prior" not in node:
        raise SchemaError(f"{pointer}/prior", "missing required field")
    pnode = _require_obj(node["prior"], f"{pointer}/prior")
    _reject_unknown(pnode, {"kind", "params"}, f"{pointer}/prior")
    if "kind" not in pnode or "params" not in pnode:
        raise SchemaError(f"{pointer}/prior", "prior needs kind and params")
    try:
        prior = QualityPrior(kind=pnode["kind"], params=tuple(pnode["params"]))
    except InvalidInputError as exc:
        raise SchemaError(f"{pointer}/prior", str(exc)) from exc
    proxy_a, proxy_b, sigma = 1.0, 0.0, 0.0
    if "proxy" in node:
        xnode = _require_obj(node["proxy"], f"{pointer}/proxy")
        _reject_unknown(xnode, {"a", "b", "sigma"}, f"{pointer}/proxy")
        proxy_a = _num(xnode, "a", f"{pointer}/proxy", required=False, default=1.0)
        proxy_b = _num(xnode, "b", f"{pointer}/proxy", required=False, default=0.0)
        sigma = _num(xnode, "sigma", f"{pointer}/proxy", required=False, default=0.0, minimum=0.0)
    seed = _num(node, "seed", pointer, required=False, default=None, minimum=0, integer=True)
    try:
        return CohortSpec(
            n=n, prior=prior, pass_model=model,
            proxy_a=proxy_a, proxy_b=proxy_b, sigma_proxy=sigma,
            seed=seed if seed is not None else (default_seed or 0),
        )
    except InvalidInputError as exc:
        raise SchemaError(pointer, str(exc)) from exc


def parse_scenario_document(doc: Any) -> ScenarioDocument:
    doc = _require_obj(doc, "")
    allowed = {"policy", "creator", "continuation", "budgets", "loop", "engine", "cohort", "seed"}
    _reject_unknown(doc, allowed, "")
    for key in ("policy", "creator", "continuation"):
        if key not in doc:
            raise SchemaError(f"/{key}", "missing required field")
    seed = _num(doc, "seed", "", required=False, default=None, minimum=0, integer=True)
    policy = _parse_policy(doc["policy"], "/policy")
    creator = _parse_creator(doc["creator"], "/creator")
    continuation = _parse_continuation(doc["continuation"], "/continuation")
    scenario = Scenario(policy=policy, creator=creator, continuation=continuation)
    return ScenarioDocument(
        scenario=scenario,
        budgets=_parse_budgets(doc["budgets"], "/budgets") if "budgets" in doc else None,
        loop=_parse_loop(doc["loop"], "/loop") if "loop" in doc else None,
        engine=_parse_engine(doc["engine"], "/engine", seed) if "engine" in doc else None,
        cohort=(
            _parse_cohort(doc["cohort"], "/cohort", policy.pass_model, seed)
            if "cohort" in doc
            else None
        ),
        seed=seed,
    )


def load_scenario_file(path: str) -> ScenarioDocument:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}")
    return parse_scenario_document(doc)


# ---------------------------------------------------------------------------
# canonical rendering
# ---------------------------------------------------------------------------

def _jsonable(value):
    if isinstance(value, float):
        if math.isnan(value):
            return None
        if math.isinf(value):
            return 1e308 if value > 0 else -1e308
    return value


def to_json(payload: Any) -> str:
    """Canonical JSON text: sorted keys, two-space indent, LF, trailing newline."""
    return json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n"


def scenario_to_dict(doc_or_scenario) -> dict:
    scen = doc_or_scenario.scenario if isinstance(doc_or_scenario, ScenarioDocument) else doc_or_scenario
    return {
        "policy": {
            "q": scen.policy.q,
            "B": scen.policy.bounty,
            "pass_model": pass_model_to_dict(scen.policy.pass_model),
        },
        "creator": {
            "alpha": scen.creator.alpha,
            "kappa": scen.creator.kappa,
            "mu0": scen.creator.mu0,
            "mu_low": scen.creator.mu_low,
            "mu_high": scen.creator.mu_high,
        },
        "continuation": {
            "h0": scen.continuation.h0,
            "dh": scen.continuation.dh,
            "gamma": scen.continuation.gamma,
        },
    }


def equilibrium_to_dict(rep: EquilibriumReport) -> dict:
    return {
        "mu_star": rep.mu_star,
        "corner": rep.corner,
        "p": rep.p,
        "p_prime": rep.p_prime,
        "leverage": _jsonable(rep.leverage),
        "gap_curvature": rep.gap_curvature,
        "sensitivities": {
            "mu_q": rep.mu_q,
            "mu_b": rep.mu_b,
            "mu_h": rep.mu_h,
            "mu_alpha": rep.mu_alpha,
        },
        "regularity_satisfied": rep.regularity_satisfied,
        "warnings": list(rep.warnings),
    }


def first_best_to_dict(fb: FirstBestReport) -> dict:
    return {
        "mu_fb": fb.mu_fb,
        "corner": fb.corner,
        "p": fb.p,
        "p_prime": fb.p_prime,
    }


def estimate_to_dict(est: ContinuationEstimate) -> dict:
    return {
        "h0": est.h0,
        "h1": est.h1,
        "dh": est.dh,
        "ci_h0": est.ci_h0,
        "ci_h1": est.ci_h1,
        "ci_dh": est.ci_dh,
        "method": est.method,
        "n_reps": est.n_reps,
        "n_pass": est.n_pass,
        "n_fail": est.n_fail,
        "seed": est.seed,
        "truncated": est.truncated,
        "unconditional_mean": _jsonable(est.unconditional_mean),
        "pass_share": _jsonable(est.pass_share),
    }


def budget_state_to_dict(state: BudgetState) -> dict:
    return {
        "q": state.q,
        "B": state.b,
        "lambda_imp": state.lam_imp,
        "lambda_dollar": state.lam_cash,
        "eta_q": state.eta_q,
        "eta_b": state.eta_b,
        "rho": state.rho,
        "bounty_cap": state.bounty_cap,
        "iteration": state.iteration,
        "residual_q": _jsonable(state.residual_q),
        "residual_dollar": _jsonable(state.residual_cash),
        "cash_usage": _jsonable(state.cash_usage),
        "welfare": _jsonable(state.welfare),
    }


def budget_state_from_dict(node: Any, pointer: str = "/state") -> BudgetState:
    node = _require_obj(node, pointer)
    allowed = {
        "q", "B", "lambda_imp", "lambda_dollar", "eta_q", "eta_b", "rho",
        "bounty_cap", "iteration", "residual_q", "residual_dollar",
        "cash_usage", "welfare",
    }
    _reject_unknown(node, allowed, pointer)

    def opt(key, default):
        v = node.get(key, default)
        return default if v is None else float(v)

    return BudgetState(
        q=_num(node, "q", pointer, minimum=0.0),
        b=_num(node, "B", pointer, minimum=0.0),
        lam_imp=_num(node, "lambda_imp", pointer, required=False, default=0.0, minimum=0.0),
        lam_cash=_num(node, "lambda_dollar", pointer, required=False, default=0.0, minimum=0.0),
        eta_q=_num(node, "eta_q", pointer, required=False, default=0.05, minimum=0.0),
        eta_b=_num(node, "eta_b", pointer, required=False, default=0.05, minimum=0.0),
        rho=_num(node, "rho", pointer, required=False, default=0.05, minimum=0.0),
        bounty_cap=_num(node, "bounty_cap", pointer, required=False, default=100.0, exclusive_min=0.0),
        iteration=_num(node, "iteration", pointer, required=False, default=0, minimum=0, integer=True),
        residual_q=opt("residual_q", float("nan")),
        residual_cash=opt("residual_dollar", float("nan")),
        cash_usage=opt("cash_usage", float("nan")),
        welfare=opt("welfare", float("nan")),
    )


def fit_to_dict(fit: PassCurveFit) -> dict:
    return {
        "grid": list(fit.grid),
        "fitted": list(fit.fitted),
        "median_proxy": fit.median_proxy,
        "p_at_median": fit.p_at_median,
        "slope_at_median": fit.slope_at_median,
        "slope_zscored": fit.slope_zscored,
        "bandwidth": fit.bandwidth,
        "n_records": fit.n_records,
        "unreliable_slope": fit.unreliable_slope,
        "warnings": list(fit.warnings),
    }


def record_to_dict(rec: TelemetryRecord) -> dict:
    return {
        "id": rec.entrant_id,
        "proxy": rec.proxy,
        "S": rec.successes,
        "pass": rec.passed,
        "outcomes": list(rec.outcomes),
    }
