"""Instance generators: hardness families and seeded random workloads.

The two hardness families are prefix-closed bundle ladders: instance I_i
submits bundles B_1 through B_i in order, and a uniform draw over the
instances forces any deterministic online rule to commit to one target set.
The ``theorem3`` family is the six-bundle construction for markets with
k = T = 2; the ``theorem5`` family is the (m + n + 2)-bundle ladder realizing
k = 2^m and T = 2^(n-1).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence, Union

from .model import (
    Instance,
    MarketBounds,
    Reservation,
    format_rational,
    instance_from_dict,
    instance_to_dict,
    to_rational,
    validate_instance,
)

THEOREM3 = "theorem3"
THEOREM5 = "theorem5"

FAMILY_FORMAT_VERSION = 1


@dataclass(frozen=True)
class YaoFamily:
    """A bundle ladder plus its prefix instances I_1..I_N."""

    kind: str
    capacity: int
    bundles: tuple[tuple[Reservation, ...], ...]
    instances: tuple[Instance, ...]
    epsilon: Optional[Fraction] = None
    n: Optional[int] = None
    m: Optional[int] = None

    @property
    def size(self) -> int:
        return len(self.bundles)


def _ladder_instances(
    capacity: int,
    bounds: MarketBounds,
    bundles: Sequence[Sequence[Reservation]],
) -> tuple[Instance, ...]:
    instances = []
    for depth in range(1, len(bundles) + 1):
        jobs: list[Reservation] = []
        for bundle in bundles[:depth]:
            jobs.extend(bundle)
        inst = Instance(capacity=capacity, bounds=bounds, jobs=tuple(jobs))
        violations = validate_instance(inst)
        if violations:
            raise RuntimeError(f"generator produced an invalid instance: {violations}")
        instances.append(inst)
    return tuple(instances)


def _theorem3_bundles(capacity: int, epsilon: Fraction) -> tuple[tuple[Reservation, ...], ...]:
    C = capacity
    eps = epsilon
    half = C // 2 + 1
    one = Fraction(1)

    def job(bundle: int, index: int, a, d, t, c, v) -> Reservation:
        return Reservation(
            id=f"B{bundle}-{index}",
            a=to_rational(a), d=to_rational(d), t=to_rational(t),
            c=c, v=to_rational(v),
        )

    return (
        (job(1, 1, 2 - eps, 3 + eps, 1 + 2 * eps, half, (one + 2 * eps) * half),),
        (job(2, 1, Fraction(3, 2), Fraction(7, 2), 2, half, 2 * half),),
        (job(3, 1, Fraction(3, 2), Fraction(7, 2), 2, half, 4 * half),),
        (
            job(4, 1, Fraction(1, 2), Fraction(5, 2), 2, half, 4 * half),
            job(4, 2, Fraction(5, 2), Fraction(9, 2), 2, half, 4 * half),
        ),
        (
            job(5, 1, Fraction(1, 2), Fraction(5, 2), 2, C, 4 * C),
            job(5, 2, Fraction(5, 2), Fraction(9, 2), 2, C, 4 * C),
        ),
        (
            job(6, 1, 0, 2, 2, C, 4 * C),
            job(6, 2, 3, 5, 2, C, 4 * C),
            job(6, 3, 2, 3, 1, C, 2 * C),
        ),
    )


def gen_theorem3(capacity: int, epsilon) -> YaoFamily:
    """Six-bundle hardness family for k = T = 2 markets.

    Requires even capacity >= 4 and 0 < epsilon < 1/4 so the perturbed
    first bundle stays inside the [1, 2] length band and conflicts with
    every other bundle.
    """
    epsilon = to_rational(epsilon)
    if capacity < 4 or capacity % 2 != 0:
        raise ValueError("capacity must be an even integer >= 4")
    if not (0 < epsilon < Fraction(1, 4)):
        raise ValueError("epsilon must lie strictly between 0 and 1/4")
    bundles = _theorem3_bundles(capacity, epsilon)
    bounds = MarketBounds(rho_min=1, rho_max=2, t_min=1, t_max=2)
    return YaoFamily(
        kind=THEOREM3,
        capacity=capacity,
        bundles=bundles,
        instances=_ladder_instances(capacity, bounds, bundles),
        epsilon=epsilon,
    )


def _theorem5_bundles(n: int, m: int, capacity: int) -> tuple[tuple[Reservation, ...], ...]:
    C = capacity
    half = C // 2 + 1
    bundles: list[tuple[Reservation, ...]] = []
    for i in range(1, n + 1):
        bundles.append((
            Reservation(
                id=f"B{i}-1",
                a=2**n - 2 ** (i - 1), d=2**n + 2 ** (i - 1),
                t=2**i, c=half, v=2 ** (i - 1) * (C + 2),
            ),
        ))
    for i in range(n + 1, n + m + 1):
        bundles.append((
            Reservation(
                id=f"B{i}-1",
                a=2 ** (n - 1), d=2**n + 2 ** (n - 1),
                t=2**n, c=half, v=2 ** (i - 1) * (C + 2),
            ),
        ))
    i = n + m + 1
    bundles.append((
        Reservation(
            id=f"B{i}-1",
            a=2 ** (n - 1), d=2**n + 2 ** (n - 1),
            t=2**n, c=C, v=2 ** (i - 1) * C,
        ),
    ))
    i = n + m + 2
    bundles.append((
        Reservation(id=f"B{i}-1", a=0, d=2**n, t=2**n, c=C, v=2 ** (i - 2) * C),
        Reservation(id=f"B{i}-2", a=2**n, d=2 ** (2 * n), t=2**n, c=C, v=2 ** (i - 2) * C),
    ))
    return tuple(bundles)


def gen_theorem5(n: int, m: int, capacity: int) -> YaoFamily:
    """The (m + n + 2)-bundle ladder realizing k = 2^m and T = 2^(n-1).

    The first n bundles are density-1 jobs of doubling length pinned around
    time 2^n; the next m keep length 2^n and double in density; the last two
    use the full capacity.
    """
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    if capacity < 4 or capacity % 2 != 0:
        raise ValueError("capacity must be an even integer >= 4")
    bundles = _theorem5_bundles(n, m, capacity)
    bounds = MarketBounds(rho_min=1, rho_max=2**m, t_min=2, t_max=2**n)
    return YaoFamily(
        kind=THEOREM5,
        capacity=capacity,
        bundles=bundles,
        instances=_ladder_instances(capacity, bounds, bundles),
        n=n,
        m=m,
    )


# ---------------------------------------------------------------------------
# Seeded random workloads.


@dataclass(frozen=True)
class RandomWorkloadSpec:
    """Uniform draws over finite rational choice sets, one set per field.

    Degenerate singleton sets pin a field; every choice set must stay inside
    the declared market bounds so the generated instance always validates.
    """

    job_count: int
    capacity: int
    bounds: MarketBounds
    arrivals: tuple[Fraction, ...]
    slacks: tuple[Fraction, ...]
    lengths: tuple[Fraction, ...]
    demands: tuple[int, ...]
    densities: tuple[Fraction, ...]
    seed: int = 0
    tighten_bounds: bool = False  # re-declare bounds as the realized envelope

    def __post_init__(self) -> None:
        object.__setattr__(self, "arrivals", tuple(to_rational(x) for x in self.arrivals))
        object.__setattr__(self, "slacks", tuple(to_rational(x) for x in self.slacks))
        object.__setattr__(self, "lengths", tuple(to_rational(x) for x in self.lengths))
        object.__setattr__(self, "demands", tuple(int(x) for x in self.demands))
        object.__setattr__(self, "densities", tuple(to_rational(x) for x in self.densities))
        self._check()

    def _check(self) -> None:
        if self.job_count < 0:
            raise ValueError("job_count must be >= 0")
        if self.capacity < 1:
            raise ValueError("capacity must be >= 1")
        if self.job_count > 0:
            for name in ("arrivals", "slacks", "lengths", "demands", "densities"):
                if not getattr(self, name):
                    raise ValueError(f"choice set {name!r} is empty")
        if any(s < 0 for s in self.slacks):
            raise ValueError("slacks must be >= 0")
        if any(not (self.bounds.t_min <= t <= self.bounds.t_max) for t in self.lengths):
            raise ValueError("length choices fall outside the market bounds")
        if any(not (self.bounds.rho_min <= r <= self.bounds.rho_max) for r in self.densities):
            raise ValueError("density choices fall outside the market bounds")
        if any(not (1 <= c <= self.capacity) for c in self.demands):
            raise ValueError("demand choices fall outside [1, capacity]")

    @staticmethod
    def from_dict(data: dict) -> "RandomWorkloadSpec":
        bounds_data = data["bounds"]
        return RandomWorkloadSpec(
            job_count=int(data["job_count"]),
            capacity=int(data["capacity"]),
            bounds=MarketBounds(
                rho_min=to_rational(bounds_data["rho_min"]),
                rho_max=to_rational(bounds_data["rho_max"]),
                t_min=to_rational(bounds_data["t_min"]),
                t_max=to_rational(bounds_data["t_max"]),
            ),
            arrivals=tuple(to_rational(x) for x in data["arrivals"]),
            slacks=tuple(to_rational(x) for x in data["slacks"]),
            lengths=tuple(to_rational(x) for x in data["lengths"]),
            demands=tuple(int(x) for x in data["demands"]),
            densities=tuple(to_rational(x) for x in data["densities"]),
            seed=int(data.get("seed", 0)),
            tighten_bounds=bool(data.get("tighten_bounds", False)),
        )

    def to_dict(self) -> dict:
        return {
            "job_count": self.job_count,
            "capacity": self.capacity,
            "bounds": {
                "rho_min": format_rational(self.bounds.rho_min),
                "rho_max": format_rational(self.bounds.rho_max),
                "t_min": format_rational(self.bounds.t_min),
                "t_max": format_rational(self.bounds.t_max),
            },
            "arrivals": [format_rational(x) for x in self.arrivals],
            "slacks": [format_rational(x) for x in self.slacks],
            "lengths": [format_rational(x) for x in self.lengths],
            "demands": list(self.demands),
            "densities": [format_rational(x) for x in self.densities],
            "seed": self.seed,
            "tighten_bounds": self.tighten_bounds,
        }


def gen_random(spec: RandomWorkloadSpec, seed: Optional[int] = None) -> Instance:
    """Deterministic-in-seed workload; the instance always validates clean."""
    rng = random.Random(spec.seed if seed is None else seed)
    jobs = []
    for idx in range(spec.job_count):
        a = rng.choice(spec.arrivals)
        t = rng.choice(spec.lengths)
        slack = rng.choice(spec.slacks)
        c = rng.choice(spec.demands)
        rho = rng.choice(spec.densities)
        jobs.append(
            Reservation(
                id=f"j{idx:02d}", a=a, d=a + t + slack, t=t, c=c, v=rho * c * t
            )
        )
    bounds = spec.bounds
    if spec.tighten_bounds and jobs:
        densities = [job.density for job in jobs]
        lengths = [job.t for job in jobs]
        bounds = MarketBounds(
            rho_min=min(densities), rho_max=max(densities),
            t_min=min(lengths), t_max=max(lengths),
        )
    inst = Instance(capacity=spec.capacity, bounds=bounds, jobs=tuple(jobs))
    violations = validate_instance(inst)
    if violations:
        raise RuntimeError(f"generator produced an invalid instance: {violations}")
    return inst


# ---------------------------------------------------------------------------
# Family serialization: one instance file per ladder prefix plus a manifest.


def save_family(family: YaoFamily, out_dir: Union[str, Path]) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    filenames = []
    for idx, inst in enumerate(family.instances, 1):
        name = f"I{idx:02d}.json"
        Path(out, name).write_text(json.dumps(instance_to_dict(inst), indent=2) + "\n")
        filenames.append(name)
    manifest = {
        "version": FAMILY_FORMAT_VERSION,
        "kind": family.kind,
        "capacity": family.capacity,
        "bundles": [[job.id for job in bundle] for bundle in family.bundles],
        "instances": filenames,
    }
    if family.epsilon is not None:
        manifest["epsilon"] = format_rational(family.epsilon)
    if family.n is not None:
        manifest["n"] = family.n
        manifest["m"] = family.m
    Path(out, "family.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return out


def load_family(directory: Union[str, Path]) -> YaoFamily:
    root = Path(directory)
    manifest = json.loads(Path(root, "family.json").read_text())
    if int(manifest.get("version")) != FAMILY_FORMAT_VERSION:
        raise ValueError(f"unsupported family format version: {manifest.get('version')!r}")
    instances = tuple(
        instance_from_dict(json.loads(Path(root, name).read_text()))
        for name in manifest["instances"]
    )
    by_id = {job.id: job for job in instances[-1].jobs}
    bundles = tuple(
        tuple(by_id[job_id] for job_id in bundle_ids)
        for bundle_ids in manifest["bundles"]
    )
    return YaoFamily(
        kind=manifest["kind"],
        capacity=int(manifest["capacity"]),
        bundles=bundles,
        instances=instances,
        epsilon=to_rational(manifest["epsilon"]) if "epsilon" in manifest else None,
        n=int(manifest["n"]) if "n" in manifest else None,
        m=int(manifest["m"]) if "m" in manifest else None,
    )
