"""Built-in scenario presets reproducing the reference figure primitives.

Each preset carries everything its figure needs, so regeneration requires no
extra inputs: ``fig1`` the frontier curves (q=10, s=3); ``fig2``/``fig3``
the best-response crossing and the implementability bounty (alpha=0.5,
dH=20, kappa=60); ``fig4`` the leverage heatmap over bar/window pairs;
``fig5`` the marginal-value sweeps; ``fig6`` the noise-attenuated frontier;
``appc-h`` the Thompson continuation spread (1 seat, 20 fixed competitors).
"""

from __future__ import annotations

import numpy as np

from .budget import Budgets, LoopConfig
from .engines import EngineConfig
from .equilibrium import ContinuationLandscape, CreatorPrimitives, Policy, Scenario
from .errors import InvalidInputError
from .frontier import Binomial, BinomialBar, NoiseRates, Noisy
from .scenario import ScenarioDocument

__all__ = ["PRESET_NAMES", "preset_document", "FIG2_BAR", "fig2_scenario"]

PRESET_NAMES = ("fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "appc-h")

FIG2_BAR = BinomialBar(q=10, s=3, mu_bar=0.3)


def fig2_scenario(bounty: float = 0.0) -> Scenario:
    return Scenario(
        policy=Policy(q=10.0, pass_model=Binomial(FIG2_BAR), bounty=bounty),
        creator=CreatorPrimitives(alpha=0.5, kappa=60.0, mu0=0.0),
        continuation=ContinuationLandscape(h0=0.0, dh=20.0, gamma=0.9),
    )


def _appch_engine(seed: int) -> EngineConfig:
    return EngineConfig(
        prior_a=1.0,
        prior_b=1.0,
        competitors=tuple(float(x) for x in np.linspace(0.30, 0.60, 20)),
        seats=1,
        weights=(1.0,),
        gamma=0.95,
        n_reps=10_000,
        seed=seed,
    )


def preset_document(name: str, seed: int | None = None) -> ScenarioDocument:
    if name not in PRESET_NAMES:
        raise InvalidInputError(
            f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}"
        )
    base_seed = 20260811 if seed is None else seed
    scen = fig2_scenario()
    if name == "fig6":
        noisy = Noisy(inner=Binomial(FIG2_BAR), noise=NoiseRates(eta0=0.10, eta1=0.05))
        scen = Scenario(
            policy=Policy(q=10.0, pass_model=noisy, bounty=0.0),
            creator=scen.creator,
            continuation=scen.continuation,
        )
        return ScenarioDocument(scenario=scen, seed=base_seed)
    if name == "appc-h":
        return ScenarioDocument(
            scenario=scen, engine=_appch_engine(base_seed), seed=base_seed
        )
    if name == "fig5":
        return ScenarioDocument(
            scenario=scen,
            budgets=Budgets(impressions=12.0, cash=50.0),
            loop=LoopConfig(),
            seed=base_seed,
        )
    return ScenarioDocument(scenario=scen, seed=base_seed)
