"""Online posted-price mechanisms behind one uniform interface.

Four mechanism kinds share the same arrival loop: quote a take-it-or-leave-it
price from the reported length and demand (never from the value, window, or
prior jobs), accept iff the value covers the price and an earliest-fit slot
exists, and charge the quoted price on acceptance.  Randomness is drawn once
per run as explicit ``Coins`` so any run can be replayed or enumerated.

Price formulas (rho_min, t_min from the market bounds, C the capacity):

  random-pricing         p = rho_min * t * max{(C/2)^i, c}
  greedy                 p = rho_min * c * t            (no filter coin)
  binary-filter          p = rho_min * 2^(u-1) * max{(C/2)^i, c}
                             * max{t_min * 2^(v-1), t}
  bounded-binary-filter  p = rho_min * 2^(u-1) * c * max{t_min * 2^(v-1), t}

with i uniform on {0,1}, u uniform on [1, L_k], v uniform on [1, L_T], where
L_k = max(1, ceil(log2 k)) and L_T = max(1, ceil(log2 T)).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .model import (
    Decision,
    Instance,
    MarketBounds,
    Reservation,
    require_valid,
    to_rational,
)
from .timeline import CapacityTimeline

RANDOM_PRICING = "random-pricing"
GREEDY = "greedy"
BINARY_FILTER = "binary-filter"
BOUNDED_BINARY_FILTER = "bounded-binary-filter"

MECHANISM_KINDS = (RANDOM_PRICING, GREEDY, BINARY_FILTER, BOUNDED_BINARY_FILTER)


@dataclass(frozen=True)
class Coins:
    """Random draws fixed once per run.

    ``i`` is the capacity-threshold coin; ``u`` and ``v`` are the density and
    length band coins used only by the binary-filter variants (the bounded
    variant draws but ignores ``i``; greedy ignores everything).
    """

    i: int
    u: Optional[int] = None
    v: Optional[int] = None

    def __post_init__(self) -> None:
        if self.i not in (0, 1):
            raise ValueError(f"coin i must be 0 or 1, got {self.i!r}")


@dataclass(frozen=True)
class MechanismConfig:
    kind: str
    bounds: MarketBounds
    capacity: int
    alpha: Optional[Fraction] = None  # demand cap c/C <= alpha, needed for bound claims

    def __post_init__(self) -> None:
        if self.kind not in MECHANISM_KINDS:
            raise ValueError(f"unknown mechanism kind {self.kind!r}")
        if self.capacity < 1:
            raise ValueError("capacity must be >= 1")
        if self.alpha is not None:
            alpha = to_rational(self.alpha)
            object.__setattr__(self, "alpha", alpha)
            if not (0 < alpha <= Fraction(1, 2)):
                raise ValueError("alpha must lie in (0, 1/2]")


def ceil_log2(q: Fraction) -> int:
    """Smallest integer e >= 0 with 2^e >= q, computed exactly."""
    q = to_rational(q)
    exponent = 0
    power = Fraction(1)
    while power < q:
        power *= 2
        exponent += 1
    return exponent


def coin_levels(bounds: MarketBounds) -> tuple[int, int]:
    """(L_k, L_T): band counts for the density and length coins, both >= 1.

    Clamping to 1 keeps degenerate markets (k = 1 or T = 1) total: an empty
    coin range would make the mechanism undefined there.
    """
    return max(1, ceil_log2(bounds.k)), max(1, ceil_log2(bounds.T))


def draw_coins(config: MechanismConfig, seed: int) -> Coins:
    """Uniform coins for this mechanism kind, deterministic in the seed."""
    rng = random.Random(seed)
    if config.kind in (RANDOM_PRICING, GREEDY):
        return Coins(i=rng.randint(0, 1))
    level_k, level_t = coin_levels(config.bounds)
    u = rng.randint(1, level_k)
    v = rng.randint(1, level_t)
    i = rng.randint(0, 1)
    return Coins(i=i, u=u, v=v)


def coin_space(config: MechanismConfig) -> tuple[Coins, ...]:
    """Every coin tuple the mechanism distinguishes, for exact expectations.

    Greedy is deterministic (one tuple); bounded-binary-filter ignores ``i``,
    so one representative per (u, v) suffices.
    """
    if config.kind == GREEDY:
        return (Coins(i=0),)
    if config.kind == RANDOM_PRICING:
        return (Coins(i=0), Coins(i=1))
    level_k, level_t = coin_levels(config.bounds)
    if config.kind == BOUNDED_BINARY_FILTER:
        return tuple(
            Coins(i=0, u=u, v=v)
            for u in range(1, level_k + 1)
            for v in range(1, level_t + 1)
        )
    return tuple(
        Coins(i=i, u=u, v=v)
        for u in range(1, level_k + 1)
        for v in range(1, level_t + 1)
        for i in (0, 1)
    )


def quote_price(config: MechanismConfig, coins: Coins, job: Reservation) -> Fraction:
    """The posted price for a reported job.

    Depends only on the configuration, the coins, and the reported t and c;
    never on v, the window, or what happened earlier in the run.
    """
    bounds = config.bounds
    half_cap = Fraction(config.capacity, 2)
    if config.kind == RANDOM_PRICING:
        threshold = half_cap if coins.i == 1 else Fraction(1)
        return bounds.rho_min * job.t * max(threshold, Fraction(job.c))
    if config.kind == GREEDY:
        return bounds.rho_min * job.c * job.t
    if coins.u is None or coins.v is None:
        raise ValueError(f"{config.kind} requires u and v coins")
    density_step = Fraction(2) ** (coins.u - 1)
    length_floor = bounds.t_min * Fraction(2) ** (coins.v - 1)
    length_term = max(length_floor, job.t)
    if config.kind == BOUNDED_BINARY_FILTER:
        demand_term = Fraction(job.c)
    else:
        threshold = half_cap if coins.i == 1 else Fraction(1)
        demand_term = max(threshold, Fraction(job.c))
    return bounds.rho_min * density_step * demand_term * length_term


def evaluate_arrival(
    config: MechanismConfig,
    coins: Coins,
    timeline: CapacityTimeline,
    job: Reservation,
) -> tuple[Decision, CapacityTimeline]:
    """Decide one arrival against a timeline; returns the post-decision timeline.

    Accepts iff the value covers the price (ties accept) and an earliest-fit
    slot exists; the price is charged at acceptance.
    """
    price = quote_price(config, coins, job)
    if job.v >= price:
        start = timeline.earliest_feasible_start(job)
        if start is not None:
            return (
                Decision(accepted=True, price=price, start=start),
                timeline.commit(job, start),
            )
    return Decision(accepted=False), timeline


@dataclass(frozen=True)
class MechanismState:
    """Run state threaded through arrivals; the log is append-only."""

    config: MechanismConfig
    coins: Coins
    timeline: CapacityTimeline
    log: tuple[tuple[str, Decision], ...] = ()


def initial_state(config: MechanismConfig, coins: Coins) -> MechanismState:
    return MechanismState(
        config=config,
        coins=coins,
        timeline=CapacityTimeline.empty(config.capacity),
    )


def on_arrival(state: MechanismState, job: Reservation) -> tuple[MechanismState, Decision]:
    decision, timeline = evaluate_arrival(state.config, state.coins, state.timeline, job)
    next_state = MechanismState(
        config=state.config,
        coins=state.coins,
        timeline=timeline,
        log=state.log + ((job.id, decision),),
    )
    return next_state, decision


@dataclass(frozen=True)
class Outcome:
    """Per-run record: all decisions plus exact welfare and revenue totals."""

    decisions: tuple[tuple[str, Decision], ...]
    welfare: Fraction
    revenue: Fraction
    coins: Coins


def run_sequence(config: MechanismConfig, coins: Coins, inst: Instance) -> Outcome:
    """Fold the online mechanism over the instance's arrival order."""
    require_valid(inst)
    state = initial_state(config, coins)
    welfare = Fraction(0)
    revenue = Fraction(0)
    for job in inst.jobs:
        state, decision = on_arrival(state, job)
        if decision.accepted:
            welfare += job.v
            revenue += decision.price
    return Outcome(decisions=state.log, welfare=welfare, revenue=revenue, coins=coins)
