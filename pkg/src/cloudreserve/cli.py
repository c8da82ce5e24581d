"""Command-line interface.

Reporting commands print JSON (default) or CSV and exit 0 only when every
claimed bound is satisfied (or, for ``audit``, when no profitable deviation
was found), so the CLI doubles as a scriptable checker.
"""

from __future__ import annotations

import json
import sys
from fractions import Fraction
from pathlib import Path

import click

from .adversary import (
    RandomWorkloadSpec,
    gen_random,
    gen_theorem3,
    gen_theorem5,
    load_family,
    save_family,
)
from .harness import (
    DeviationGrid,
    RatioReport,
    YaoReport,
    exact_expectation,
    format_coins,
    result_rows,
    truthfulness_audit,
    yao_evaluate,
)
from .mechanisms import (
    MECHANISM_KINDS,
    MechanismConfig,
    draw_coins,
    run_sequence,
)
from .model import (
    InvalidInstanceError,
    format_rational,
    load_instance,
    parse_rational,
    rational_to_decimal,
    save_instance,
)
from .oracle import OracleCapExceeded, optimal_welfare


def _rational_field(value: Fraction) -> dict:
    return {"rational": format_rational(value), "decimal": rational_to_decimal(value)}


def _print_rows(rows: list[dict]) -> None:
    import csv as _csv

    from .harness import CSV_COLUMNS

    writer = _csv.DictWriter(sys.stdout, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)


def _mechanism_config(mechanism: str, inst, alpha: str | None) -> MechanismConfig:
    return MechanismConfig(
        kind=mechanism,
        bounds=inst.bounds,
        capacity=inst.capacity,
        alpha=parse_rational(alpha) if alpha else None,
    )


format_option = click.option(
    "--format",
    "output_format",
    type=click.Choice(["json", "csv"]),
    default="json",
    show_default=True,
    help="Report output format.",
)

mechanism_option = click.option(
    "--mechanism",
    type=click.Choice(MECHANISM_KINDS),
    required=True,
    help="Mechanism kind.",
)

alpha_option = click.option(
    "--alpha",
    default=None,
    help="Demand cap c/C as a rational p/q (required for greedy and "
    "bounded-binary-filter bound claims).",
)


@click.group()
def main() -> None:
    """Truthful online reservation mechanisms: simulate, bound-check, audit."""


@main.group()
def gen() -> None:
    """Generate instances and hardness families."""


@gen.command("theorem3")
@click.option("--capacity", type=int, required=True, help="Even capacity >= 4.")
@click.option("--epsilon", required=True, help="Perturbation as a rational p/q in (0, 1/4).")
@click.option("--out", type=click.Path(), required=True, help="Output directory.")
def gen_theorem3_cmd(capacity: int, epsilon: str, out: str) -> None:
    """Six-bundle hardness family for k = T = 2."""
    family = gen_theorem3(capacity, parse_rational(epsilon))
    save_family(family, out)
    click.echo(f"wrote {len(family.instances)} instances to {out}")


@gen.command("theorem5")
@click.option("--n", "n", type=int, required=True, help="Length-ladder depth (T = 2^(n-1)).")
@click.option("--m", "m", type=int, required=True, help="Density-ladder depth (k = 2^m).")
@click.option("--capacity", type=int, required=True, help="Even capacity >= 4.")
@click.option("--out", type=click.Path(), required=True, help="Output directory.")
def gen_theorem5_cmd(n: int, m: int, capacity: int, out: str) -> None:
    """(m + n + 2)-bundle ladder realizing k = 2^m, T = 2^(n-1)."""
    family = gen_theorem5(n, m, capacity)
    save_family(family, out)
    click.echo(f"wrote {len(family.instances)} instances to {out}")


@gen.command("random")
@click.option("--spec", type=click.Path(exists=True), required=True, help="Workload spec (JSON).")
@click.option("--seed", type=int, default=None, help="Override the spec's seed.")
@click.option("--out", type=click.Path(), required=True, help="Output instance file.")
def gen_random_cmd(spec: str, seed: int | None, out: str) -> None:
    """Seeded random workload from a spec file."""
    workload = RandomWorkloadSpec.from_dict(json.loads(Path(spec).read_text()))
    inst = gen_random(workload, seed=seed)
    save_instance(inst, out)
    click.echo(f"wrote {len(inst.jobs)} jobs to {out}")


@main.command("run")
@mechanism_option
@click.option("--instance", type=click.Path(exists=True), required=True)
@click.option("--seed", type=int, required=True, help="Coin seed (same seed, same coins).")
@alpha_option
@format_option
def run_cmd(mechanism: str, instance: str, seed: int, alpha: str | None, output_format: str) -> None:
    """One online run with seeded coins."""
    inst = load_instance(instance)
    config = _mechanism_config(mechanism, inst, alpha)
    coins = draw_coins(config, seed)
    try:
        outcome = run_sequence(config, coins, inst)
    except InvalidInstanceError as exc:
        raise click.ClickException(str(exc))
    if output_format == "json":
        payload = {
            "instance": Path(instance).stem,
            "mechanism": mechanism,
            "coins": {"i": coins.i, "u": coins.u, "v": coins.v},
            "welfare": _rational_field(outcome.welfare),
            "revenue": _rational_field(outcome.revenue),
            "decisions": [
                {
                    "id": job_id,
                    "accepted": decision.accepted,
                    "price": _rational_field(decision.price) if decision.accepted else None,
                    "start": _rational_field(decision.start) if decision.accepted else None,
                }
                for job_id, decision in outcome.decisions
            ],
        }
        click.echo(json.dumps(payload, indent=2))
    else:
        import csv as _csv

        writer = _csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(["id", "accepted", "price", "start"])
        for job_id, decision in outcome.decisions:
            writer.writerow(
                [
                    job_id,
                    "true" if decision.accepted else "false",
                    format_rational(decision.price) if decision.accepted else "",
                    format_rational(decision.start) if decision.accepted else "",
                ]
            )
        writer.writerow(["welfare", format_rational(outcome.welfare), "", ""])
        writer.writerow(["revenue", format_rational(outcome.revenue), "", ""])


def _ratio_report_json(report: RatioReport) -> dict:
    return {
        "instance": report.instance_id,
        "mechanism": report.mechanism,
        "coin_tuples": report.coin_tuples,
        "expected_welfare": _rational_field(report.exact_expected_welfare),
        "expected_revenue": _rational_field(report.exact_expected_revenue),
        "opt_welfare": _rational_field(report.opt_welfare),
        "welfare_ratio": _rational_field(report.welfare_ratio),
        "revenue_ratio": _rational_field(report.revenue_ratio),
        "bound_claimed": _rational_field(report.bound_claimed),
        "bound_satisfied": report.bound_satisfied,
    }


@main.command("expect")
@mechanism_option
@click.option("--instance", type=click.Path(exists=True), required=True)
@alpha_option
@format_option
def expect_cmd(mechanism: str, instance: str, alpha: str | None, output_format: str) -> None:
    """Exact expectation over the full coin space, checked against the claimed bound."""
    inst = load_instance(instance)
    config = _mechanism_config(mechanism, inst, alpha)
    try:
        report = exact_expectation(config, inst, instance_id=Path(instance).stem)
    except (InvalidInstanceError, OracleCapExceeded, ValueError) as exc:
        raise click.ClickException(str(exc))
    if output_format == "json":
        click.echo(json.dumps(_ratio_report_json(report), indent=2))
    else:
        _print_rows(result_rows(report))
    sys.exit(0 if report.bound_satisfied else 1)


@main.command("oracle")
@click.option("--instance", type=click.Path(exists=True), required=True)
@format_option
def oracle_cmd(instance: str, output_format: str) -> None:
    """Exact offline-optimal welfare with a feasible witness."""
    inst = load_instance(instance)
    try:
        result = optimal_welfare(inst)
    except OracleCapExceeded as exc:
        raise click.ClickException(f"{exc} (explored {exc.explored_nodes} nodes)")
    if output_format == "json":
        payload = {
            "instance": Path(instance).stem,
            "opt_welfare": _rational_field(result.opt_welfare),
            "witness": [
                {"id": job_id, "start": _rational_field(start)}
                for job_id, start in result.witness
            ],
            "explored_nodes": result.explored_nodes,
        }
        click.echo(json.dumps(payload, indent=2))
    else:
        import csv as _csv

        writer = _csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(["id", "start"])
        for job_id, start in result.witness:
            writer.writerow([job_id, format_rational(start)])
        writer.writerow(["opt_welfare", format_rational(result.opt_welfare)])


def _yao_report_json(report: YaoReport) -> dict:
    payload = {
        "family": report.family_id,
        "kind": report.kind,
        "opt_welfare": [format_rational(value) for value in report.opt_welfare],
        "strategies": [
            {
                "label": strategy.label,
                "jobs": list(strategy.job_ids),
                "expected_ratio": _rational_field(strategy.expected_ratio),
                "idealized_ratio": _rational_field(strategy.idealized_ratio),
            }
            for strategy in report.strategies
        ],
        "best_strategy": report.best.label,
        "best_expected_ratio": _rational_field(report.best.expected_ratio),
        "analytic_limit": _rational_field(report.analytic_limit),
        "upper_bound": _rational_field(report.upper_bound),
    }
    if report.closed_form is not None:
        payload["closed_form"] = [format_rational(value) for value in report.closed_form]
    return payload


@main.command("yao")
@click.option("--family", type=click.Path(exists=True), required=True, help="Family directory.")
@format_option
def yao_cmd(family: str, output_format: str) -> None:
    """Evaluate every deterministic commit strategy against a hardness family."""
    fam = load_family(family)
    report = yao_evaluate(fam, family_id=Path(family).name)
    if output_format == "json":
        click.echo(json.dumps(_yao_report_json(report), indent=2))
    else:
        _print_rows(result_rows(report))
    sys.exit(0 if report.best.expected_ratio <= report.upper_bound else 1)


@main.command("audit")
@mechanism_option
@click.option("--instance", type=click.Path(exists=True), required=True)
@click.option("--seed", type=int, required=True, help="Coin seed to audit under.")
@click.option("--grid", type=click.Path(exists=True), default=None, help="Deviation grid (JSON).")
@alpha_option
@format_option
def audit_cmd(
    mechanism: str,
    instance: str,
    seed: int,
    grid: str | None,
    alpha: str | None,
    output_format: str,
) -> None:
    """Misreport audit: search the deviation grid for a profitable lie."""
    inst = load_instance(instance)
    config = _mechanism_config(mechanism, inst, alpha)
    coins = draw_coins(config, seed)
    grid_spec = DeviationGrid.from_dict(json.loads(Path(grid).read_text())) if grid else DeviationGrid()
    report = truthfulness_audit(config, coins, inst, grid_spec, instance_id=Path(instance).stem)
    if output_format == "json":
        payload = {
            "instance": report.instance_id,
            "mechanism": report.mechanism,
            "coins": format_coins(report.coins),
            "deviations_tested": report.deviations_tested,
            "profitable_deviations": [
                {
                    "job": deviation.job_id,
                    "changes": {
                        field: format_rational(Fraction(value))
                        for field, value in deviation.changes
                    },
                    "utility_gain": _rational_field(deviation.utility_gain),
                }
                for deviation in report.profitable_deviations
            ],
        }
        click.echo(json.dumps(payload, indent=2))
    else:
        _print_rows(result_rows(report))
    sys.exit(0 if not report.profitable_deviations else 1)


if __name__ == "__main__":
    main()
