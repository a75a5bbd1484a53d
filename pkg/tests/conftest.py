"""Shared fixtures: programmatic scenario builders and solved baselines.

Expensive solves are session-scoped so the suite pays for each LP once.
"""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import settings as hypothesis_settings

from shedopt import voll as voll_mod

hypothesis_settings.register_profile("repeatable", derandomize=True)
hypothesis_settings.load_profile("repeatable")
from shedopt.lp import build
from shedopt.model import (Link, Region, Scenario, Technology,
                           save_scenario)
from shedopt.simplex import SolveOptions, solve

SECTORS = ("agriculture", "services", "households", "industry", "transport")


def region_with_uniform_voll(rid: str, voll: float, sector: str = "services",
                             name: str | None = None) -> Region:
    """Region whose single demand sector carries the whole weight, so the
    sectoral VoLL equals the country VoLL."""
    weights = {s: 0.0 for s in SECTORS}
    weights[sector] = 1.0
    return Region(id=rid, name=name or rid.upper(), country_voll=voll,
                  sector_voll=voll_mod.sectoral_volls(voll, weights))


def region_from_demand(rid: str, voll: float, demand: dict,
                       name: str | None = None) -> Region:
    totals = {s: 0.0 for s in SECTORS}
    for (r, _, s), series in demand.items():
        if r == rid:
            totals[s] += float(np.sum(series))
    grand = sum(totals.values())
    if grand <= 0:
        weights = {s: 1.0 / len(SECTORS) for s in SECTORS}
    else:
        weights = {s: t / grand for s, t in totals.items()}
    return Region(id=rid, name=name or rid.upper(), country_voll=voll,
                  sector_voll=voll_mod.sectoral_volls(voll, weights))


def peaker_scenario(horizon: int = 8760, cone: float = 87.6,
                    voll: float = 8.76, seed: int = 7,
                    hours_per_year: int = 8760) -> Scenario:
    """One region, one always-available generator priced at CONE, demand
    duration curve with thousands of distinct levels."""
    rng = np.random.default_rng(seed)
    demand = np.round(rng.uniform(50.0, 150.0, horizon), 3)
    return Scenario(
        regions=(region_with_uniform_voll("p1", voll),),
        technologies=(Technology(id="backup", kind="generator",
                                 carrier_out="electricity",
                                 capex_annual=cone),),
        links=(),
        profiles={("p1", "backup"): np.ones(horizon)},
        demand={("p1", "electricity", "services"): demand},
        horizon_hours=horizon,
        hours_per_year=hours_per_year,
    )


def storage_scenario(horizon: int = 48) -> Scenario:
    """Day/night generator plus a battery; forces cycling through storage."""
    hours = np.arange(horizon)
    cf = np.where(hours % 24 < 12, 1.0, 0.0)
    demand = np.full(horizon, 10.0)
    return Scenario(
        regions=(region_with_uniform_voll("s1", 10.0),),
        technologies=(
            Technology(id="solar", kind="generator",
                       carrier_out="electricity", capex_annual=20.0),
            Technology(id="battery", kind="storage",
                       carrier_out="electricity", capex_annual=8.0,
                       energy_capex_annual=2.0, charge_eff=0.9,
                       discharge_eff=0.9),
        ),
        links=(),
        profiles={("s1", "solar"): cf},
        demand={("s1", "electricity", "services"): demand},
        horizon_hours=horizon,
        hours_per_year=8760,
    )


def export_scenario(horizon: int = 48, cap_max: float = 150.0,
                    voll_a: float = 13.27, voll_b: float = 3.65) -> Scenario:
    """Two regions sharing one scarce backup generator that only region B
    hosts; the optimum serves the expensive region A through the link while
    B sheds its own cheaper demand."""
    demand_a = np.full(horizon, 100.0)
    demand_b = np.full(horizon, 80.0)
    demand = {
        ("ra", "electricity", "industry"): demand_a,
        ("rb", "electricity", "industry"): demand_b,
    }
    return Scenario(
        regions=(
            region_with_uniform_voll("ra", voll_a, sector="industry"),
            region_with_uniform_voll("rb", voll_b, sector="industry"),
        ),
        technologies=(Technology(id="backup", kind="generator",
                                 carrier_out="electricity",
                                 capex_annual=50.0, capacity_max=cap_max),),
        links=(Link("rb", "ra", "electricity", capex_annual=2.0,
                    loss_fraction=0.05),),
        profiles={("rb", "backup"): np.ones(horizon)},
        demand=demand,
        horizon_hours=horizon,
        hours_per_year=8760,
    )


def merit_order_scenario(horizon: int = 72) -> Scenario:
    """One region, three demand sectors with strictly ordered VoLLs, supply
    capped below peak demand so shedding must pick an order."""
    rng = np.random.default_rng(11)
    demand = {
        ("m1", "electricity", "industry"): np.round(
            rng.uniform(20.0, 60.0, horizon), 3),
        ("m1", "electricity", "services"): np.round(
            rng.uniform(15.0, 50.0, horizon), 3),
        ("m1", "electricity", "households"): np.round(
            rng.uniform(25.0, 70.0, horizon), 3),
    }
    region = region_from_demand("m1", 7.3, demand)
    return Scenario(
        regions=(region,),
        technologies=(Technology(id="gen", kind="generator",
                                 carrier_out="electricity",
                                 capex_annual=60.0, capacity_max=90.0),),
        links=(),
        profiles={("m1", "gen"): np.ones(horizon)},
        demand=demand,
        horizon_hours=horizon,
        hours_per_year=8760,
    )


def two_carrier_scenario(horizon: int = 72, turbine_cap: float | None = 6.0,
                         link_cap: float | None = None) -> Scenario:
    """Electricity + hydrogen system: solar, electrolysis, hydrogen storage
    and a hydrogen turbine covering the night; used for converter/storage
    binding diagnostics."""
    hours = np.arange(horizon)
    cf = np.where(hours % 24 < 12, 1.0, 0.0)
    demand = {("c1", "electricity", "households"): np.full(horizon, 10.0)}
    region = region_from_demand("c1", 12.0, demand)
    return Scenario(
        regions=(region,),
        technologies=(
            Technology(id="solar", kind="generator",
                       carrier_out="electricity", capex_annual=15.0),
            Technology(id="pem", kind="converter", carrier_in="electricity",
                       carrier_out="hydrogen", efficiency=0.7,
                       capex_annual=10.0),
            Technology(id="h2t", kind="converter", carrier_in="hydrogen",
                       carrier_out="electricity", efficiency=0.6,
                       capex_annual=25.0, capacity_max=turbine_cap),
            Technology(id="h2s", kind="storage", carrier_out="hydrogen",
                       capex_annual=1.0, energy_capex_annual=0.05,
                       charge_eff=0.95, discharge_eff=0.95),
        ),
        links=(),
        profiles={("c1", "solar"): cf},
        demand=demand,
        horizon_hours=horizon,
        hours_per_year=8760,
    )


def sweep_scenario(horizon: int = 168) -> Scenario:
    """Cheapest supply costs 10 EUR/MWh; VoLL 5 EUR/kWh.  Factor 0.001
    makes shedding cheaper than any supply, factor 10 the reverse."""
    rng = np.random.default_rng(3)
    demand = np.round(rng.uniform(40.0, 120.0, horizon), 3)
    return Scenario(
        regions=(region_with_uniform_voll("w1", 5.0),),
        technologies=(Technology(id="gen", kind="generator",
                                 carrier_out="electricity",
                                 capex_annual=87.6),),
        links=(),
        profiles={("w1", "gen"): np.ones(horizon)},
        demand={("w1", "electricity", "services"): demand},
        horizon_hours=horizon,
        hours_per_year=8760,
    )


def stabilize_scenario(horizon: int = 720) -> Scenario:
    """Sharply peaked demand so the shed-energy budget concentrates outages
    into few full-depth hours; hours_per_year equals the horizon so LOLE
    needs no annualization."""
    rng = np.random.default_rng(23)
    demand = np.round(rng.uniform(80.0, 120.0, horizon), 3)
    demand[300] = 1000.0
    demand[301] = 520.0
    demand[500] = 640.0
    return Scenario(
        regions=(region_with_uniform_voll("t1", 2.0),),
        technologies=(Technology(id="gen", kind="generator",
                                 carrier_out="electricity",
                                 capex_annual=16.0),),
        links=(),
        profiles={("t1", "gen"): np.ones(horizon)},
        demand={("t1", "electricity", "services"): demand},
        horizon_hours=horizon,
        hours_per_year=horizon,
    )


def five_region_scenario(horizon: int = 336) -> Scenario:
    """Five regions, two carriers, ring grid plus hydrogen pipelines,
    diurnal PV and multi-day wind with a lull window; about 14k variables.
    Night and lull deficits route through the grid or get shed in the
    low-VoLL regions."""
    rng = np.random.default_rng(2050)
    hours = np.arange(horizon)
    names = ["r1", "r2", "r3", "r4", "r5"]
    volls = [13.27, 5.60, 4.5, 3.65, 2.5]
    demand = {}
    for k, rid in enumerate(names):
        base = 80.0 + 15.0 * k
        day = 1.0 + 0.25 * np.sin(2 * np.pi * (hours % 24) / 24.0 - 0.7)
        demand[(rid, "electricity", "households")] = np.round(
            base * day * rng.uniform(0.92, 1.08, horizon), 3)
    for rid in ("r2", "r4"):
        demand[(rid, "hydrogen", "industry")] = np.round(
            30.0 * rng.uniform(0.9, 1.1, horizon), 3)
    regions = tuple(region_from_demand(rid, v, demand)
                    for rid, v in zip(names, volls))
    technologies = (
        Technology(id="pv", kind="generator", carrier_out="electricity",
                   capex_annual=45.0),
        Technology(id="wind", kind="generator", carrier_out="electricity",
                   capex_annual=65.0),
        Technology(id="pem", kind="converter", carrier_in="electricity",
                   carrier_out="hydrogen", efficiency=0.7, capex_annual=30.0),
        Technology(id="h2t", kind="converter", carrier_in="hydrogen",
                   carrier_out="electricity", efficiency=0.6,
                   capex_annual=60.0, opex_var=1.0),
    )
    profiles = {}
    for k, rid in enumerate(names):
        sun = np.maximum(0.0, np.sin(2 * np.pi * ((hours % 24) - 6) / 24.0))
        pv = sun * rng.uniform(0.55, 1.0, horizon) * (0.7 + 0.06 * k)
        slow = 0.55 + 0.4 * np.sin(2 * np.pi * hours / (24 * 7) + k)
        lull = np.ones(horizon)
        lull[140:190] = 0.15
        wind = np.clip(slow * lull * rng.uniform(0.7, 1.2, horizon), 0.0, 1.0)
        profiles[(rid, "pv")] = np.round(np.clip(pv, 0.0, 1.0), 4)
        profiles[(rid, "wind")] = np.round(wind, 4)
    links = (
        Link("r1", "r2", "electricity", 8.0, 0.03),
        Link("r2", "r3", "electricity", 8.0, 0.03),
        Link("r3", "r4", "electricity", 8.0, 0.03),
        Link("r4", "r5", "electricity", 8.0, 0.03),
        Link("r5", "r1", "electricity", 8.0, 0.03),
        Link("r1", "r3", "hydrogen", 4.0, 0.02),
        Link("r2", "r4", "hydrogen", 4.0, 0.02),
    )
    return Scenario(regions=regions, technologies=technologies, links=links,
                    profiles=profiles, demand=demand, horizon_hours=horizon,
                    hours_per_year=8760)


def write_minimal_scenario_dir(path, horizon: int = 24) -> None:
    """Smallest valid on-disk fixture: one region, one generator, flat
    demand."""
    scn = Scenario(
        regions=(region_with_uniform_voll("r1", 7.3),),
        technologies=(Technology(id="gen", kind="generator",
                                 carrier_out="electricity",
                                 capex_annual=50.0),),
        links=(),
        profiles={("r1", "gen"): np.ones(horizon)},
        demand={("r1", "electricity", "services"): np.full(horizon, 5.0)},
        horizon_hours=horizon,
        hours_per_year=8760,
    )
    save_scenario(scn, path)


@pytest.fixture(scope="session")
def solved_peaker():
    import time
    scenario = peaker_scenario()
    # pay the JIT compile outside the measured window
    solve(build(peaker_scenario(horizon=24)))
    start = time.perf_counter()
    lp = build(scenario)
    solution = solve(lp, SolveOptions())
    elapsed = time.perf_counter() - start
    assert solution.status == "optimal"
    return scenario, lp, solution, elapsed


@pytest.fixture(scope="session")
def solved_five_region():
    import time
    scenario = five_region_scenario()
    solve(build(five_region_scenario(horizon=24)))
    start = time.perf_counter()
    lp = build(scenario)
    solution = solve(lp, SolveOptions())
    elapsed = time.perf_counter() - start
    assert solution.status == "optimal"
    return scenario, lp, solution, elapsed


@pytest.fixture(scope="session")
def solved_merit_order():
    scenario = merit_order_scenario()
    lp = build(scenario)
    solution = solve(lp, SolveOptions())
    assert solution.status == "optimal"
    return scenario, lp, solution


@pytest.fixture(scope="session")
def solved_export():
    scenario = export_scenario()
    lp = build(scenario)
    solution = solve(lp, SolveOptions())
    assert solution.status == "optimal"
    return scenario, lp, solution


@pytest.fixture(scope="session")
def solved_storage():
    scenario = storage_scenario()
    lp = build(scenario)
    solution = solve(lp, SolveOptions())
    assert solution.status == "optimal"
    return scenario, lp, solution


@pytest.fixture(scope="session")
def solved_two_carrier():
    scenario = two_carrier_scenario()
    lp = build(scenario)
    solution = solve(lp, SolveOptions())
    assert solution.status == "optimal"
    return scenario, lp, solution
