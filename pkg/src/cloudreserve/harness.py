"""Experiment driver: exact expectations, ratio reports, hardness-family
evaluation, misreport audits, and deterministic result emission.

Expectations are computed by enumerating the full coin space with uniform
weights, never by sampling; the coin spaces are tiny (at most 2 * L_k * L_T
tuples), so every bound check is an exact rational comparison with no
statistical tolerance.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from .adversary import (
    THEOREM3,
    THEOREM5,
    YaoFamily,
    _theorem3_bundles,
    _theorem5_bundles,
)
from .mechanisms import (
    BINARY_FILTER,
    BOUNDED_BINARY_FILTER,
    GREEDY,
    Coins,
    MechanismConfig,
    ceil_log2,
    coin_levels,
    coin_space,
    evaluate_arrival,
    run_sequence,
)
from .model import (
    Instance,
    Reservation,
    format_rational,
    rational_to_decimal,
    require_valid,
)
from .oracle import DEFAULT_JOB_CAP, DEFAULT_NODE_CAP, optimal_welfare, subset_feasible
from .timeline import CapacityTimeline


# ---------------------------------------------------------------------------
# Exact expectation and claimed-bound reports.


@dataclass(frozen=True)
class RatioReport:
    instance_id: str
    mechanism: str
    exact_expected_welfare: Fraction
    exact_expected_revenue: Fraction
    opt_welfare: Fraction
    welfare_ratio: Fraction
    revenue_ratio: Fraction
    bound_claimed: Fraction
    bound_satisfied: bool
    coin_tuples: int


def effective_spreads(config: MechanismConfig, inst: Instance) -> tuple[Fraction, Fraction]:
    """Density and length spreads realized by the jobs.

    The density spread is measured against the configured rho_min because
    that is the pricing basis; the length spread uses the realized extremes.
    Empty instances report (1, 1).
    """
    if not inst.jobs:
        return Fraction(1), Fraction(1)
    k_eff = max(job.density for job in inst.jobs) / config.bounds.rho_min
    lengths = [job.t for job in inst.jobs]
    return k_eff, max(lengths) / min(lengths)


def _require_alpha(config: MechanismConfig) -> Fraction:
    if config.alpha is None:
        raise ValueError(f"{config.kind} bound claims require alpha")
    return config.alpha


def _check_alpha_conformance(config: MechanismConfig, inst: Instance) -> None:
    if config.alpha is None:
        return
    for job in inst.jobs:
        if Fraction(job.c, config.capacity) > config.alpha:
            raise ValueError(
                f"job {job.id}: demand fraction {job.c}/{config.capacity} "
                f"exceeds alpha {format_rational(config.alpha)}"
            )


def claimed_bound(config: MechanismConfig, inst: Instance) -> Fraction:
    """The competitive-ratio guarantee applicable to this run.

    random-pricing claims 1/42 when the realized spreads stay within 2 and
    1/(8Tk + 4k + 2) otherwise; greedy claims (1-a)/(11-a) under the demand
    cap a; the filter mechanisms divide their base guarantee by the coin
    ranges L_k * L_T taken from the declared bounds.
    """
    _check_alpha_conformance(config, inst)
    if config.kind == GREEDY:
        alpha = _require_alpha(config)
        return (1 - alpha) / (11 - alpha)
    if config.kind == BOUNDED_BINARY_FILTER:
        alpha = _require_alpha(config)
        level_k, level_t = coin_levels(config.bounds)
        return (1 - alpha) / ((11 - alpha) * level_k * level_t)
    if config.kind == BINARY_FILTER:
        level_k, level_t = coin_levels(config.bounds)
        return Fraction(1, 42 * level_k * level_t)
    k_eff, t_eff = effective_spreads(config, inst)
    if k_eff <= 2 and t_eff <= 2:
        return Fraction(1, 42)
    return 1 / (8 * t_eff * k_eff + 4 * k_eff + 2)


def expected_performance(
    config: MechanismConfig, inst: Instance
) -> tuple[Fraction, Fraction, int]:
    """(expected welfare, expected revenue, coin tuples) by full enumeration."""
    space = coin_space(config)
    total_welfare = Fraction(0)
    total_revenue = Fraction(0)
    for coins in space:
        outcome = run_sequence(config, coins, inst)
        total_welfare += outcome.welfare
        total_revenue += outcome.revenue
    count = len(space)
    return total_welfare / count, total_revenue / count, count


def exact_expectation(
    config: MechanismConfig,
    inst: Instance,
    instance_id: str = "instance",
    *,
    job_cap: int = DEFAULT_JOB_CAP,
    node_cap: int = DEFAULT_NODE_CAP,
) -> RatioReport:
    """Exact expected welfare/revenue against the offline optimum."""
    require_valid(inst)
    bound = claimed_bound(config, inst)
    expected_welfare, expected_revenue, count = expected_performance(config, inst)
    opt = optimal_welfare(inst, job_cap=job_cap, node_cap=node_cap).opt_welfare
    if opt == 0:
        welfare_ratio = revenue_ratio = Fraction(1)
        satisfied = True
    else:
        welfare_ratio = expected_welfare / opt
        revenue_ratio = expected_revenue / opt
        satisfied = welfare_ratio >= bound and revenue_ratio >= bound
    return RatioReport(
        instance_id=instance_id,
        mechanism=config.kind,
        exact_expected_welfare=expected_welfare,
        exact_expected_revenue=expected_revenue,
        opt_welfare=opt,
        welfare_ratio=welfare_ratio,
        revenue_ratio=revenue_ratio,
        bound_claimed=bound,
        bound_satisfied=satisfied,
        coin_tuples=count,
    )


# ---------------------------------------------------------------------------
# Per-band conditional check for the binary filter.


@dataclass(frozen=True)
class BandCheck:
    """Conditional-expectation check for one density/length band (u, v)."""

    u: int
    v: int
    expected_welfare: Fraction  # full-run welfare, conditional on (u, v), mean over i
    opt_band_welfare: Fraction  # offline optimum restricted to the band's jobs
    bound: Fraction
    satisfied: bool
    band_jobs: int


def band_of(job: Reservation, bounds) -> tuple[int, int]:
    """Which (u, v) band a job belongs to: density and length in
    [rho_min * 2^(u-1), rho_min * 2^u] and [t_min * 2^(v-1), t_min * 2^v]."""
    u = max(1, ceil_log2(job.density / bounds.rho_min))
    v = max(1, ceil_log2(job.t / bounds.t_min))
    return u, v


def binary_filter_band_checks(
    config: MechanismConfig,
    inst: Instance,
    *,
    job_cap: int = DEFAULT_JOB_CAP,
    node_cap: int = DEFAULT_NODE_CAP,
) -> tuple[BandCheck, ...]:
    """For each coin band (u, v): E_i[welfare | u, v] >= OPT(band jobs) / 42.

    The expectation is over the capacity coin i only, with (u, v) pinned;
    the optimum is recomputed on the sub-instance of jobs whose density and
    length fall in that band.
    """
    if config.kind != BINARY_FILTER:
        raise ValueError("band checks apply to the binary-filter mechanism")
    require_valid(inst)
    level_k, level_t = coin_levels(config.bounds)
    checks = []
    for u in range(1, level_k + 1):
        for v in range(1, level_t + 1):
            band_jobs = tuple(
                job for job in inst.jobs if band_of(job, config.bounds) == (u, v)
            )
            sub = Instance(capacity=inst.capacity, bounds=inst.bounds, jobs=band_jobs)
            opt_band = optimal_welfare(sub, job_cap=job_cap, node_cap=node_cap).opt_welfare
            welfare_sum = Fraction(0)
            for i in (0, 1):
                outcome = run_sequence(config, Coins(i=i, u=u, v=v), inst)
                welfare_sum += outcome.welfare
            expected = welfare_sum / 2
            bound = opt_band / 42
            checks.append(
                BandCheck(
                    u=u,
                    v=v,
                    expected_welfare=expected,
                    opt_band_welfare=opt_band,
                    bound=bound,
                    satisfied=expected >= bound,
                    band_jobs=len(band_jobs),
                )
            )
    return tuple(checks)


# ---------------------------------------------------------------------------
# Hardness-family evaluation.


@dataclass(frozen=True)
class YaoStrategy:
    """A deterministic commit strategy: accept exactly these jobs as they arrive."""

    label: str
    job_ids: tuple[str, ...]
    expected_ratio: Fraction  # at the family's finite parameters, exact
    idealized_ratio: Fraction  # large-capacity (and vanishing-epsilon) value


@dataclass(frozen=True)
class YaoReport:
    kind: str
    family_id: str
    opt_welfare: tuple[Fraction, ...]
    strategies: tuple[YaoStrategy, ...]
    best: YaoStrategy
    analytic_limit: Fraction  # idealized value of the best strategy
    upper_bound: Fraction
    closed_form: Optional[tuple[Fraction, ...]] = None  # per commit depth j


def _limit_value_coefs(family: YaoFamily) -> dict[str, Fraction]:
    """Linear-in-capacity coefficient of each job's value.

    Bundle values are affine in the capacity (with epsilon sent to 0 for the
    six-bundle family), so differencing two capacities recovers the exact
    coefficient that survives the large-capacity limit.
    """
    if family.kind == THEOREM3:
        low = _theorem3_bundles(16, Fraction(0))
        high = _theorem3_bundles(32, Fraction(0))
    elif family.kind == THEOREM5:
        low = _theorem5_bundles(family.n, family.m, 16)
        high = _theorem5_bundles(family.n, family.m, 32)
    else:
        raise ValueError(f"unknown family kind {family.kind!r}")
    low_values = {job.id: job.v for bundle in low for job in bundle}
    high_values = {job.id: job.v for bundle in high for job in bundle}
    return {
        job_id: (high_values[job_id] - low_values[job_id]) / 16
        for job_id in low_values
    }


def yao_evaluate(
    family: YaoFamily,
    family_id: Optional[str] = None,
    *,
    job_cap: int = DEFAULT_JOB_CAP,
    node_cap: int = DEFAULT_NODE_CAP,
) -> YaoReport:
    """Expected ratio of every deterministic commit strategy against the
    uniform draw over the family's instances, with exact offline optima.

    Strategies are the commit-to-one-bundle rules, plus (for the six-bundle
    family) every compatible cross-bundle pair from the last three bundles;
    mirror pairs with identical welfare profiles collapse to one row.  The
    idealized column re-evaluates each strategy in the large-capacity limit;
    the report's analytic limit is the idealized value of the best strategy.
    """
    size = family.size
    bundle_of = {
        job.id: b_idx
        for b_idx, bundle in enumerate(family.bundles, 1)
        for job in bundle
    }
    opt_values = []
    for idx, inst in enumerate(family.instances, 1):
        opt = optimal_welfare(inst, job_cap=job_cap, node_cap=node_cap).opt_welfare
        bundle_value = sum((job.v for job in family.bundles[idx - 1]), Fraction(0))
        if opt != bundle_value:
            raise RuntimeError(
                f"instance {idx}: offline optimum {opt} is not the newest "
                f"bundle's value {bundle_value}"
            )
        opt_values.append(opt)

    coefs = _limit_value_coefs(family)
    opt_coefs = [
        sum((coefs[job.id] for job in bundle), Fraction(0)) for bundle in family.bundles
    ]

    def welfare_profile(jobs: Sequence[Reservation]) -> tuple[Fraction, ...]:
        return tuple(
            sum((job.v for job in jobs if bundle_of[job.id] <= i), Fraction(0))
            for i in range(1, size + 1)
        )

    def expected_ratio(profile: Sequence[Fraction]) -> Fraction:
        return sum(
            (profile[i] / opt_values[i] for i in range(size)), Fraction(0)
        ) / size

    def idealized_ratio(jobs: Sequence[Reservation]) -> Fraction:
        total = Fraction(0)
        for i in range(1, size + 1):
            strategy_coef = sum(
                (coefs[job.id] for job in jobs if bundle_of[job.id] <= i), Fraction(0)
            )
            total += strategy_coef / opt_coefs[i - 1]
        return total / size

    strategies: list[YaoStrategy] = []
    for b_idx, bundle in enumerate(family.bundles, 1):
        strategies.append(
            YaoStrategy(
                label=f"commit:B{b_idx}",
                job_ids=tuple(job.id for job in bundle),
                expected_ratio=expected_ratio(welfare_profile(bundle)),
                idealized_ratio=idealized_ratio(bundle),
            )
        )
    if family.kind == THEOREM3:
        pool = [job for bundle in family.bundles[3:] for job in bundle]
        last_instance = family.instances[-1]
        seen: set[tuple[str, tuple[Fraction, ...]]] = set()
        for x, y in combinations(pool, 2):
            if bundle_of[x.id] == bundle_of[y.id]:
                continue  # subsets of one bundle are covered by its commit row
            if subset_feasible(last_instance, [x.id, y.id]) is None:
                continue
            pair = sorted((x, y), key=lambda job: bundle_of[job.id])
            label = f"pair:B{bundle_of[pair[0].id]}+B{bundle_of[pair[1].id]}"
            profile = welfare_profile(pair)
            if (label, profile) in seen:
                continue
            seen.add((label, profile))
            strategies.append(
                YaoStrategy(
                    label=label,
                    job_ids=tuple(job.id for job in pair),
                    expected_ratio=expected_ratio(profile),
                    idealized_ratio=idealized_ratio(pair),
                )
            )

    best = max(strategies, key=lambda s: (s.expected_ratio,))
    analytic_limit = max(s.idealized_ratio for s in strategies)
    if family.kind == THEOREM3:
        upper_bound = Fraction(1, 3)
        closed_form = None
    else:
        upper_bound = Fraction(2, size)  # size = log2(8kT) exactly
        closed_form = tuple(
            (2 - Fraction(1, 2 ** (size - j))) / size for j in range(1, size + 1)
        )
    return YaoReport(
        kind=family.kind,
        family_id=family_id or family.kind,
        opt_welfare=tuple(opt_values),
        strategies=tuple(strategies),
        best=best,
        analytic_limit=analytic_limit,
        upper_bound=upper_bound,
        closed_form=closed_form,
    )


# ---------------------------------------------------------------------------
# Truthfulness audit.


@dataclass(frozen=True)
class DeviationGrid:
    """Finite misreport grid: per-dimension sweeps plus optional corner combos.

    The audit is a refutation engine over this grid, not a proof; the allowed
    directions are a-hat >= a, d-hat <= d, t-hat >= t, c-hat >= c, and any
    positive value report.
    """

    points_per_dim: int = 5
    include_corners: bool = False

    def __post_init__(self) -> None:
        if self.points_per_dim < 2:
            raise ValueError("points_per_dim must be >= 2")

    @staticmethod
    def from_dict(data: dict) -> "DeviationGrid":
        return DeviationGrid(
            points_per_dim=int(data.get("points_per_dim", 5)),
            include_corners=bool(data.get("include_corners", False)),
        )

    def to_dict(self) -> dict:
        return {
            "points_per_dim": self.points_per_dim,
            "include_corners": self.include_corners,
        }


@dataclass(frozen=True)
class ProfitableDeviation:
    job_id: str
    changes: tuple[tuple[str, object], ...]
    utility_gain: Fraction


@dataclass(frozen=True)
class AuditReport:
    instance_id: str
    mechanism: str
    coins: Coins
    deviations_tested: int
    profitable_deviations: tuple[ProfitableDeviation, ...]


def _axis_points(job: Reservation, capacity: int, points: int) -> dict[str, list]:
    steps = [Fraction(j, points - 1) for j in range(points)]
    span = job.slack if job.slack > 0 else job.t
    demand_points: list[int] = []
    for cand in (
        [job.c, job.c + 1, job.c + 2, 2 * job.c, capacity, capacity + 1]
        + [job.c + extra for extra in range(3, 3 + points)]
    ):
        if cand >= job.c and cand not in demand_points:
            demand_points.append(cand)
        if len(demand_points) == points:
            break
    value_multipliers = [Fraction(2 * j + 1, points) for j in range(points)]
    if Fraction(1) not in value_multipliers:
        closest = min(range(points), key=lambda j: abs(value_multipliers[j] - 1))
        value_multipliers[closest] = Fraction(1)
    return {
        "a": [job.a + span * f for f in steps],
        "d": [job.d - span * f for f in steps],
        "t": [job.t * (1 + f) for f in steps],
        "c": demand_points,
        "v": [job.v * mult for mult in value_multipliers],
    }


def deviations_for(job: Reservation, capacity: int, grid: DeviationGrid) -> list[dict]:
    axes = _axis_points(job, capacity, grid.points_per_dim)
    deviations: list[dict] = []
    truthful = {"a": job.a, "d": job.d, "t": job.t, "c": job.c, "v": job.v}
    for field, values in axes.items():
        for value in values:
            if value != truthful[field]:
                deviations.append({field: value})
    if grid.include_corners:
        extremes = {field: values[-1] for field, values in axes.items()}
        fields = list(extremes)
        for mask in product((False, True), repeat=len(fields)):
            changes = {
                field: extremes[field]
                for field, flip in zip(fields, mask)
                if flip and extremes[field] != truthful[field]
            }
            if changes and changes not in deviations:
                deviations.append(changes)
    return deviations


def truthfulness_audit(
    config: MechanismConfig,
    coins: Coins,
    inst: Instance,
    grid: DeviationGrid = DeviationGrid(),
    instance_id: str = "instance",
) -> AuditReport:
    """Search the misreport grid for a deviation that beats truthful utility.

    Replays each job against the truthful run with only that job's report
    changed.  Earlier arrivals cannot observe the deviator's report and the
    deviator's utility (true value minus charged price if accepted, else 0)
    is settled at its own arrival, so each deviation re-evaluates a single
    decision against the shared truthful prefix timeline.
    """
    require_valid(inst)
    prefix_timelines: list[CapacityTimeline] = []
    truthful_utilities: list[Fraction] = []
    timeline = CapacityTimeline.empty(config.capacity)
    for job in inst.jobs:
        prefix_timelines.append(timeline)
        decision, timeline = evaluate_arrival(config, coins, timeline, job)
        truthful_utilities.append(
            job.v - decision.price if decision.accepted else Fraction(0)
        )

    tested = 0
    profitable: list[ProfitableDeviation] = []
    for idx, job in enumerate(inst.jobs):
        for changes in deviations_for(job, config.capacity, grid):
            reported = job.report(**changes)
            decision, _ = evaluate_arrival(
                config, coins, prefix_timelines[idx], reported
            )
            utility = job.v - decision.price if decision.accepted else Fraction(0)
            tested += 1
            if utility > truthful_utilities[idx]:
                profitable.append(
                    ProfitableDeviation(
                        job_id=job.id,
                        changes=tuple(sorted(changes.items())),
                        utility_gain=utility - truthful_utilities[idx],
                    )
                )
    return AuditReport(
        instance_id=instance_id,
        mechanism=config.kind,
        coins=coins,
        deviations_tested=tested,
        profitable_deviations=tuple(profitable),
    )


def audit_all_coins(
    config: MechanismConfig,
    inst: Instance,
    grid: DeviationGrid = DeviationGrid(),
    instance_id: str = "instance",
) -> list[AuditReport]:
    """One audit per coin tuple: universal truthfulness holds per fixed coins."""
    return [
        truthfulness_audit(config, coins, inst, grid, instance_id)
        for coins in coin_space(config)
    ]


# ---------------------------------------------------------------------------
# Result emission.

CSV_COLUMNS = [
    "instance",
    "mechanism",
    "coins",
    "welfare",
    "revenue",
    "opt",
    "welfare_ratio",
    "revenue_ratio",
    "bound",
    "satisfied",
    "welfare_decimal",
    "revenue_decimal",
    "opt_decimal",
    "welfare_ratio_decimal",
    "revenue_ratio_decimal",
    "bound_decimal",
]

_RATIONAL_COLUMNS = ("welfare", "revenue", "opt", "welfare_ratio", "revenue_ratio", "bound")


def format_coins(coins: Coins) -> str:
    parts = [f"i={coins.i}"]
    if coins.u is not None:
        parts.append(f"u={coins.u}")
    if coins.v is not None:
        parts.append(f"v={coins.v}")
    return ",".join(parts)


def _base_row(instance: str, mechanism: str, coins: str, satisfied: bool, **rationals) -> dict:
    row = {column: "" for column in CSV_COLUMNS}
    row["instance"] = instance
    row["mechanism"] = mechanism
    row["coins"] = coins
    row["satisfied"] = "true" if satisfied else "false"
    for name, value in rationals.items():
        if value is None:
            continue
        row[name] = format_rational(value)
        row[f"{name}_decimal"] = rational_to_decimal(value)
    return row


def result_rows(report) -> list[dict]:
    """Flatten a report into CSV rows (one per strategy for family reports)."""
    if isinstance(report, RatioReport):
        return [
            _base_row(
                report.instance_id,
                report.mechanism,
                str(report.coin_tuples),
                report.bound_satisfied,
                welfare=report.exact_expected_welfare,
                revenue=report.exact_expected_revenue,
                opt=report.opt_welfare,
                welfare_ratio=report.welfare_ratio,
                revenue_ratio=report.revenue_ratio,
                bound=report.bound_claimed,
            )
        ]
    if isinstance(report, AuditReport):
        return [
            _base_row(
                report.instance_id,
                report.mechanism,
                format_coins(report.coins),
                not report.profitable_deviations,
            )
        ]
    if isinstance(report, YaoReport):
        return [
            _base_row(
                report.family_id,
                strategy.label,
                "",
                strategy.expected_ratio <= report.upper_bound,
                welfare_ratio=strategy.expected_ratio,
                bound=report.upper_bound,
            )
            for strategy in report.strategies
        ]
    raise TypeError(f"cannot emit report of type {type(report).__name__}")


def emit_results(
    reports: Iterable,
    out_dir: Union[str, Path],
    basename: str = "results",
) -> tuple[Path, Path]:
    """Write a CSV table and a JSON summary; byte-for-byte deterministic.

    Rationals appear both as "num/den" and as 15-significant-digit decimals.
    The summary carries worst-case (minimum) ratios, matching the worst-case
    reading of a competitive ratio.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = [row for report in reports for row in result_rows(report)]
    csv_path = out / f"{basename}.csv"
    with csv_path.open("w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)

    def parse_ratio(row: dict) -> Optional[Fraction]:
        text = row["welfare_ratio"]
        return Fraction(text) if text else None

    welfare_ratios = [r for r in (parse_ratio(row) for row in rows) if r is not None]
    revenue_ratios = [
        Fraction(row["revenue_ratio"]) for row in rows if row["revenue_ratio"]
    ]
    summary = {
        "version": 1,
        "row_count": len(rows),
        "all_satisfied": all(row["satisfied"] == "true" for row in rows),
        "worst_welfare_ratio": format_rational(min(welfare_ratios)) if welfare_ratios else None,
        "worst_revenue_ratio": format_rational(min(revenue_ratios)) if revenue_ratios else None,
        "rows": rows,
    }
    summary_path = out / f"{basename}.json"
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return csv_path, summary_path
