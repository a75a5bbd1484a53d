"""Stable-system re-optimization and the VoLL sensitivity sweep.

``stabilize`` re-solves the system with a per-region cap on annual shed
energy and reports capacity/cost deltas against the cost-optimal baseline.
``voll_sweep`` rescales every VoLL by a set of factors and records how the
loss share responds, classifying each region into the I..V VoLL bands.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ._format import fmt12, round12_tree
from ._sparse import SparseMatrix
from .analytics import DispatchResult, lole_hours
from .lp import LinearProgram, RowBlock, build
from .model import Scenario
from .simplex import OPTIMAL, Solution, SolveOptions, solve

DEFAULT_SWEEP_FACTORS = (0.001, 0.01, 0.1, 0.5, 1.0, 2.0, 10.0)

# VoLL class bands in EUR/kWh: upper bounds of I..IV; V is everything above.
VOLL_CLASS_UPPER = ((0.025, "I"), (0.5, "II"), (3.0, "III"), (5.5, "IV"))


def classify_voll(voll_eur_per_kwh: float) -> str:
    for upper, label in VOLL_CLASS_UPPER:
        if voll_eur_per_kwh < upper:
            return label
    return "V"


class StabilizeInfeasible(RuntimeError):
    def __init__(self, message: str, candidate_caps: list[str]):
        super().__init__(message)
        self.candidate_caps = candidate_caps


class SweepError(RuntimeError):
    def __init__(self, message: str, factor: float,
                 partial: list["SweepRecord"]):
        super().__init__(message)
        self.factor = factor
        self.partial = partial


@dataclass(frozen=True)
class CapacityDelta:
    region: str
    technology: str
    baseline_mw: float
    stabilized_mw: float
    delta_mw: float
    delta_percent: Optional[float]   # None when the baseline is zero


@dataclass
class StabilizationReport:
    threshold_hours: float
    baseline_objective: float
    stabilized_objective: float
    cost_delta_percent: float
    deltas: list[CapacityDelta]              # power capacities, MW
    energy_deltas: list[CapacityDelta]       # storage energy capacities, MWh
    residual_lole: dict[str, float]          # h/a per region
    meets_threshold: bool


def _options(scenario: Scenario) -> SolveOptions:
    cfg = scenario.solver
    return SolveOptions(feas_tol=cfg.feas_tol, opt_tol=cfg.opt_tol,
                        max_iters=cfg.max_iters)


def add_shed_caps(lp: LinearProgram, scenario: Scenario,
                  threshold_hours: float) -> LinearProgram:
    """Append one row per region: total shed energy over the horizon
    <= threshold * average hourly demand (the per-year budget prorated
    through annual_demand / hours_per_year)."""
    if threshold_hours < 0:
        raise ValueError("threshold must be >= 0")
    region_ids = sorted(r.id for r in scenario.regions)
    rows, cols, vals, rhs, blocks = [], [], [], [], []
    next_row = lp.n_le
    for region in region_ids:
        shed_blocks = [blk for blk in lp.catalog.blocks_of("shd")
                       if blk.key[0] == region]
        if not shed_blocks:
            continue
        annual_demand = float(scenario.region_demand(region).sum()) \
            * scenario.annualization
        budget = threshold_hours * annual_demand / scenario.hours_per_year
        for blk in shed_blocks:
            for j in range(blk.start, blk.stop):
                rows.append(next_row)
                cols.append(j)
                vals.append(1.0)
        rhs.append(budget)
        blocks.append(RowBlock("stb", (region,), next_row, 1))
        next_row += 1
    a_le = SparseMatrix(
        next_row, lp.n_vars,
        np.concatenate([lp.a_le.rows, np.array(rows, dtype=np.int64)]),
        np.concatenate([lp.a_le.cols, np.array(cols, dtype=np.int64)]),
        np.concatenate([lp.a_le.vals, np.array(vals)]),
    )
    return LinearProgram(
        c=lp.c, a_eq=lp.a_eq, b_eq=lp.b_eq,
        a_le=a_le, b_le=np.concatenate([lp.b_le, np.array(rhs)]),
        lb=lp.lb, ub=lp.ub, catalog=lp.catalog,
        eq_blocks=lp.eq_blocks, le_blocks=lp.le_blocks + tuple(blocks),
        start_at_upper=lp.start_at_upper,
    )


def _capacity_deltas(lp: LinearProgram, kind: str, base_x: np.ndarray,
                     stab_x: np.ndarray) -> list[CapacityDelta]:
    out = []
    for blk in lp.catalog.blocks_of(kind):
        base = float(base_x[blk.start])
        stab = float(stab_x[blk.start])
        pct = 100.0 * (stab - base) / base if base > 1e-9 else None
        out.append(CapacityDelta(region=blk.key[0], technology=blk.key[1],
                                 baseline_mw=base, stabilized_mw=stab,
                                 delta_mw=stab - base, delta_percent=pct))
    return out


def stabilize(scenario: Scenario, threshold_hours: float,
              options: SolveOptions | None = None
              ) -> tuple[Solution, StabilizationReport]:
    """Re-optimize with per-region shed budgets and report the deltas.

    threshold 0 demands a zero-shed system; math.inf returns the baseline
    unchanged.  Raises :class:`StabilizeInfeasible` when the budgets cannot
    be met, listing the finite capacity caps that are the only candidates
    for binding the expansion.
    """
    options = options or _options(scenario)
    lp = build(scenario)
    baseline = solve(lp, options)
    if baseline.status != OPTIMAL:
        raise RuntimeError(f"baseline solve failed: {baseline.status}")

    if math.isinf(threshold_hours):
        report = StabilizationReport(
            threshold_hours=threshold_hours,
            baseline_objective=baseline.objective,
            stabilized_objective=baseline.objective,
            cost_delta_percent=0.0,
            deltas=_capacity_deltas(lp, "cap", baseline.x, baseline.x),
            energy_deltas=_capacity_deltas(lp, "ecap", baseline.x, baseline.x),
            residual_lole=_residual_lole(scenario, lp, baseline.x),
            meets_threshold=True,
        )
        return baseline, report

    capped = add_shed_caps(lp, scenario, threshold_hours)
    stabilized = solve(capped, options)
    if stabilized.status != OPTIMAL:
        candidates = []
        for kind in ("cap", "lcap"):
            for blk in lp.catalog.blocks_of(kind):
                if np.isfinite(lp.ub[blk.start]):
                    candidates.append(lp.catalog.names[blk.start])
        raise StabilizeInfeasible(
            f"stabilized system is {stabilized.status} at threshold "
            f"{threshold_hours} h/a; expansion is capped by: "
            f"{', '.join(candidates) or 'nothing (numerical failure)'}",
            candidates)

    residual = _residual_lole(scenario, capped, stabilized.x)
    base_obj = baseline.objective
    delta_pct = (100.0 * (stabilized.objective - base_obj) / base_obj
                 if base_obj else 0.0)
    report = StabilizationReport(
        threshold_hours=threshold_hours,
        baseline_objective=base_obj,
        stabilized_objective=stabilized.objective,
        cost_delta_percent=delta_pct,
        deltas=_capacity_deltas(lp, "cap", baseline.x, stabilized.x),
        energy_deltas=_capacity_deltas(lp, "ecap", baseline.x, stabilized.x),
        residual_lole=residual,
        meets_threshold=all(v <= threshold_hours + 1e-9
                            for v in residual.values()),
    )
    return stabilized, report


def _residual_lole(scenario: Scenario, lp: LinearProgram,
                   x: np.ndarray) -> dict[str, float]:
    dispatch = DispatchResult.from_solution(scenario, lp, x)
    return {region: lole_hours(dispatch, region)
            for region in dispatch.region_ids}


@dataclass(frozen=True)
class SweepRecord:
    factor: float
    volls: dict[str, float]          # scaled country VoLL per region
    loss_shares: dict[str, float]    # percent per region
    region_class: dict[str, str]     # I..V per region
    objective: float


def voll_sweep(scenario: Scenario,
               factors: Sequence[float] = DEFAULT_SWEEP_FACTORS,
               options: SolveOptions | None = None) -> list[SweepRecord]:
    """Scale all VoLLs by each factor, re-solve from scratch, record the
    per-region loss share and VoLL class.  Records are ordered by factor;
    a failed solve raises :class:`SweepError` carrying partial results."""
    if not factors:
        raise ValueError("need at least one factor")
    if any(f <= 0 for f in factors):
        raise ValueError("factors must be > 0")
    options = options or _options(scenario)
    records: list[SweepRecord] = []
    for factor in sorted(factors):
        scaled = scenario.with_scaled_volls(factor)
        lp = build(scaled)
        solution = solve(lp, options)
        if solution.status != OPTIMAL:
            raise SweepError(f"solve at factor {factor} returned "
                             f"{solution.status}", factor, records)
        dispatch = DispatchResult.from_solution(scaled, lp, solution.x)
        volls = {r.id: r.country_voll for r in scaled.regions}
        records.append(SweepRecord(
            factor=float(factor),
            volls=volls,
            loss_shares={region: _loss(dispatch, region)
                         for region in dispatch.region_ids},
            region_class={region: classify_voll(volls[region])
                          for region in dispatch.region_ids},
            objective=solution.objective,
        ))
    return records


def _loss(dispatch: DispatchResult, region: str) -> float:
    from .analytics import loss_share
    return loss_share(dispatch, region)


def write_stabilization_json(report: StabilizationReport,
                             path: str | Path) -> None:
    payload = {
        "threshold_hours_per_year": report.threshold_hours,
        "cost_delta_percent": report.cost_delta_percent,
        "deltas": [
            {"region": d.region, "technology": d.technology,
             "baseline_mw": d.baseline_mw, "stabilized_mw": d.stabilized_mw,
             "delta_percent": d.delta_percent}
            for d in report.deltas
        ],
        "residual_lole": dict(sorted(report.residual_lole.items())),
    }
    Path(path).write_text(
        json.dumps(round12_tree(payload), indent=2, sort_keys=True) + "\n",
        encoding="utf-8")


def write_sweep_csv(records: list[SweepRecord], path: str | Path) -> None:
    import csv
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["factor", "region", "voll_eur_per_kwh",
                    "loss_share_percent", "class"])
        for record in records:
            for region in sorted(record.volls):
                w.writerow([
                    fmt12(record.factor), region,
                    fmt12(record.volls[region]),
                    fmt12(record.loss_shares[region]),
                    record.region_class[region],
                ])
