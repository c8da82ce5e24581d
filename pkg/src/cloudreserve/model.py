"""Domain types for the reservation market.

Every time and money quantity is an exact rational (``fractions.Fraction``),
never a float: feasibility of hardness instances hinges on values like
2 - 1/1000, where rounding could flip an accept/reject decision.  All types
are immutable value objects and safe to share across concurrent runs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence, Union

RationalLike = Union[Fraction, int, str]

INSTANCE_FORMAT_VERSION = 1


class InvalidInstanceError(ValueError):
    """An operation that requires a clean instance found validation violations."""

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("instance failed validation: " + "; ".join(self.violations))


def to_rational(value: RationalLike) -> Fraction:
    """Coerce an int, Fraction, or "num/den" string to an exact Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    raise TypeError(f"cannot interpret {value!r} as a rational")


def parse_rational(text: str) -> Fraction:
    """Parse "num/den" (or the integer shorthand "n") into a Fraction."""
    body = text.strip()
    if "/" in body:
        num_text, den_text = body.split("/", 1)
        num = int(num_text.strip())
        den = int(den_text.strip())
        if den <= 0:
            raise ValueError(f"denominator must be positive in {text!r}")
        return Fraction(num, den)
    return Fraction(int(body))


def format_rational(value: Fraction) -> str:
    """Render a Fraction as "num/den", or "n" when the denominator is 1."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def rational_to_decimal(value: Fraction, significant_digits: int = 15) -> str:
    """Decimal rendering at fixed significance, round-half-even."""
    with localcontext() as ctx:
        ctx.prec = significant_digits
        ctx.rounding = ROUND_HALF_EVEN
        quotient = Decimal(value.numerator) / Decimal(value.denominator)
    return str(quotient)


@dataclass(frozen=True)
class Reservation:
    """One customer request: c instances for duration t inside [a, d], worth v.

    ``a`` is the earliest start, ``d`` the deadline, so the job must occupy
    some half-open interval [s, s+t) with a <= s and s+t <= d.
    """

    id: str
    a: Fraction
    d: Fraction
    t: Fraction
    c: int
    v: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", to_rational(self.a))
        object.__setattr__(self, "d", to_rational(self.d))
        object.__setattr__(self, "t", to_rational(self.t))
        object.__setattr__(self, "c", int(self.c))
        object.__setattr__(self, "v", to_rational(self.v))

    @property
    def density(self) -> Fraction:
        """Value per instance-hour: v / (c * t)."""
        return self.v / (self.c * self.t)

    @property
    def slack(self) -> Fraction:
        return self.d - self.a - self.t

    def report(self, **changes) -> "Reservation":
        """A copy with some fields re-reported (used by the misreport audit)."""
        return replace(self, **changes)


@dataclass(frozen=True)
class MarketBounds:
    """Envelope for value densities and lengths of every job in a market."""

    rho_min: Fraction
    rho_max: Fraction
    t_min: Fraction
    t_max: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "rho_min", to_rational(self.rho_min))
        object.__setattr__(self, "rho_max", to_rational(self.rho_max))
        object.__setattr__(self, "t_min", to_rational(self.t_min))
        object.__setattr__(self, "t_max", to_rational(self.t_max))

    @property
    def k(self) -> Fraction:
        """Density spread rho_max / rho_min."""
        return self.rho_max / self.rho_min

    @property
    def T(self) -> Fraction:
        """Length spread t_max / t_min."""
        return self.t_max / self.t_min


@dataclass(frozen=True)
class Instance:
    """Capacity, market bounds, and jobs in arrival (submission) order.

    The job order is the online order: a mechanism deciding jobs[i] must never
    look at jobs[i+1:].
    """

    capacity: int
    bounds: MarketBounds
    jobs: tuple[Reservation, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "capacity", int(self.capacity))
        object.__setattr__(self, "jobs", tuple(self.jobs))


@dataclass(frozen=True)
class Decision:
    """Irrevocable per-job outcome; price and start are present iff accepted."""

    accepted: bool
    price: Optional[Fraction] = None
    start: Optional[Fraction] = None


def validate_instance(inst: Instance) -> list[str]:
    """Collect every invariant violation; an empty list means the instance is clean.

    Violations are data, not faults: each entry names the job (or "bounds" /
    "instance") and the failed predicate.
    """
    violations: list[str] = []
    if inst.capacity < 1:
        violations.append(f"instance: capacity must be >= 1 (got {inst.capacity})")
    b = inst.bounds
    if b.rho_min <= 0 or b.t_min <= 0:
        violations.append("bounds: rho_min and t_min must be positive")
    if b.rho_min > b.rho_max:
        violations.append("bounds: rho_min exceeds rho_max")
    if b.t_min > b.t_max:
        violations.append("bounds: t_min exceeds t_max")

    seen_ids: set[str] = set()
    for job in inst.jobs:
        if job.id in seen_ids:
            violations.append(f"job {job.id}: duplicate id")
        seen_ids.add(job.id)
        if job.t <= 0:
            violations.append(f"job {job.id}: length must be positive")
            continue
        if job.c < 1:
            violations.append(f"job {job.id}: demand must be >= 1")
            continue
        if job.v <= 0:
            violations.append(f"job {job.id}: value must be positive")
            continue
        if job.t > job.d - job.a:
            violations.append(f"job {job.id}: length exceeds window")
        if job.c > inst.capacity:
            violations.append(f"job {job.id}: demand exceeds capacity")
        if not (b.t_min <= job.t <= b.t_max):
            violations.append(f"job {job.id}: length outside market bounds")
        rho = job.density
        if not (b.rho_min <= rho <= b.rho_max):
            violations.append(f"job {job.id}: density outside market bounds")
    return violations


def require_valid(inst: Instance) -> None:
    violations = validate_instance(inst)
    if violations:
        raise InvalidInstanceError(violations)


def realized_bounds(inst: Instance) -> Optional[MarketBounds]:
    """The tight envelope actually spanned by the jobs; None for an empty instance."""
    if not inst.jobs:
        return None
    densities = [job.density for job in inst.jobs]
    lengths = [job.t for job in inst.jobs]
    return MarketBounds(
        rho_min=min(densities),
        rho_max=max(densities),
        t_min=min(lengths),
        t_max=max(lengths),
    )


# ---------------------------------------------------------------------------
# Instance file format (versioned JSON; rationals as "num/den" strings).


def instance_to_dict(inst: Instance) -> dict:
    return {
        "version": INSTANCE_FORMAT_VERSION,
        "capacity": inst.capacity,
        "bounds": {
            "rho_min": format_rational(inst.bounds.rho_min),
            "rho_max": format_rational(inst.bounds.rho_max),
            "t_min": format_rational(inst.bounds.t_min),
            "t_max": format_rational(inst.bounds.t_max),
        },
        "jobs": [
            {
                "id": job.id,
                "a": format_rational(job.a),
                "d": format_rational(job.d),
                "t": format_rational(job.t),
                "c": job.c,
                "v": format_rational(job.v),
            }
            for job in inst.jobs
        ],
    }


def instance_from_dict(data: dict) -> Instance:
    version = data.get("version")
    if int(version) != INSTANCE_FORMAT_VERSION:
        raise ValueError(f"unsupported instance format version: {version!r}")
    bounds_data = data["bounds"]
    bounds = MarketBounds(
        rho_min=to_rational(bounds_data["rho_min"]),
        rho_max=to_rational(bounds_data["rho_max"]),
        t_min=to_rational(bounds_data["t_min"]),
        t_max=to_rational(bounds_data["t_max"]),
    )
    jobs = tuple(
        Reservation(
            id=str(job["id"]),
            a=to_rational(job["a"]),
            d=to_rational(job["d"]),
            t=to_rational(job["t"]),
            c=int(job["c"]),
            v=to_rational(job["v"]),
        )
        for job in data["jobs"]
    )
    return Instance(capacity=int(data["capacity"]), bounds=bounds, jobs=jobs)


def save_instance(inst: Instance, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(inst), indent=2) + "\n")


def load_instance(path: Union[str, Path]) -> Instance:
    return instance_from_dict(json.loads(Path(path).read_text()))
