"""Shared workload builders for the test suite."""

from __future__ import annotations

from fractions import Fraction


from cloudreserve import Instance, MarketBounds, RandomWorkloadSpec, Reservation, gen_random

# Choice sets for the two market regimes exercised throughout the suite.
DENSITIES_2 = (Fraction(1), Fraction(5, 4), Fraction(3, 2), Fraction(2))
LENGTHS_2 = (Fraction(1), Fraction(5, 4), Fraction(3, 2), Fraction(2))
DENSITIES_8 = (Fraction(1), Fraction(3, 2), Fraction(2), Fraction(3), Fraction(4), Fraction(6), Fraction(8))
LENGTHS_8 = (Fraction(1), Fraction(2), Fraction(3), Fraction(4), Fraction(6), Fraction(8))

ARRIVALS = (Fraction(0), Fraction(1, 2), Fraction(1), Fraction(2), Fraction(3), Fraction(4))
SLACKS = (Fraction(0), Fraction(1, 2), Fraction(1), Fraction(2))


def make_workload(
    seed: int,
    capacity: int,
    densities=DENSITIES_2,
    lengths=LENGTHS_2,
    demands=None,
    job_count: int | None = None,
    tighten: bool = True,
    rho_max=None,
    t_max=None,
    arrivals=ARRIVALS,
    slacks=SLACKS,
) -> Instance:
    spec = RandomWorkloadSpec(
        job_count=3 + seed % 8 if job_count is None else job_count,
        capacity=capacity,
        bounds=MarketBounds(
            rho_min=1,
            rho_max=rho_max if rho_max is not None else max(densities),
            t_min=1,
            t_max=t_max if t_max is not None else max(lengths),
        ),
        arrivals=arrivals,
        slacks=slacks,
        lengths=lengths,
        demands=tuple(demands) if demands else tuple(range(1, capacity + 1)),
        densities=densities,
        seed=seed,
        tighten_bounds=tighten,
    )
    return gen_random(spec)


def job(job_id, a, d, t, c, v) -> Reservation:
    return Reservation(id=job_id, a=a, d=d, t=t, c=c, v=v)


def instance(capacity, jobs, rho_min=1, rho_max=2, t_min=1, t_max=2) -> Instance:
    return Instance(
        capacity=capacity,
        bounds=MarketBounds(rho_min=rho_min, rho_max=rho_max, t_min=t_min, t_max=t_max),
        jobs=tuple(jobs),
    )
