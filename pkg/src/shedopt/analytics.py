"""Reliability metrics and diagnostics over solved dispatches.

All operations are read-only over :class:`DispatchResult`, which repacks a
solution vector into per-region/carrier/sector arrays.  Metrics reported
per year use the scenario's annualization factor, so sub-year horizons
still yield h/a figures.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ._format import fmt12, round12_tree
from .lp import LinearProgram
from .model import CARRIERS, SECTORS, Scenario

# Exceedance grid: 2 % then 5 % steps up to 50 % depth.
DEPTH_LEVELS = (0.02, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40,
                0.45, 0.50)

BOUND_FAMILIES = ("converter_capacity", "storage_power", "storage_energy",
                  "link_capacity")


@dataclass(frozen=True)
class OutageEvent:
    region: str
    start: int               # first hour of the run (wrap events start late)
    duration: int
    energy_mwh: float
    max_depth: float         # worst shed fraction of concurrent demand
    year: int = 0            # index of the dispatch the event came from


@dataclass
class DispatchResult:
    """Solution values repacked for analytics; immutable by convention."""

    scenario: Scenario
    region_ids: list[str]
    shed: np.ndarray          # (region, carrier, sector, hour) MWh
    demand: np.ndarray        # same shape
    dispatch: dict            # (region, tech) -> MWh per hour
    flows: dict               # link key -> (sent forward, sent reverse)
    soc: dict                 # (region, storage) -> MWh
    charge: dict
    discharge: dict
    annualization: float
    threshold: float

    @classmethod
    def from_solution(cls, scenario: Scenario, lp: LinearProgram,
                      x: np.ndarray) -> "DispatchResult":
        x = np.asarray(x, dtype=np.float64)
        if lp.catalog is None:
            raise ValueError("LP carries no catalog; build it from a scenario")
        if x.shape != (lp.n_vars,):
            raise ValueError(f"x has shape {x.shape}, expected ({lp.n_vars},)")
        H = scenario.horizon_hours
        region_ids = sorted(r.id for r in scenario.regions)
        ridx = {r: i for i, r in enumerate(region_ids)}
        shed = np.zeros((len(region_ids), len(CARRIERS), len(SECTORS), H))
        demand = np.zeros_like(shed)
        for key, series in scenario.demand.items():
            r, carrier, sector = key
            demand[ridx[r], CARRIERS.index(carrier),
                   SECTORS.index(sector)] = series
        dispatch, soc, charge, discharge = {}, {}, {}, {}
        flows = {}
        for blk in lp.catalog.blocks:
            if blk.kind == "shd":
                r, carrier, sector = blk.key
                shed[ridx[r], CARRIERS.index(carrier),
                     SECTORS.index(sector)] = x[blk.start:blk.stop]
            elif blk.kind == "dsp":
                dispatch[blk.key] = x[blk.start:blk.stop]
            elif blk.kind == "soc":
                soc[blk.key] = x[blk.start:blk.stop]
            elif blk.kind == "chg":
                charge[blk.key] = x[blk.start:blk.stop]
            elif blk.kind == "dis":
                discharge[blk.key] = x[blk.start:blk.stop]
            elif blk.kind == "flw":
                link_key, direction = blk.key
                pair = flows.setdefault(link_key, [None, None])
                pair[0 if direction == "F" else 1] = x[blk.start:blk.stop]
        flows = {k: (fwd, rev) for k, (fwd, rev) in flows.items()}
        return cls(scenario=scenario, region_ids=region_ids, shed=shed,
                   demand=demand, dispatch=dispatch, flows=flows, soc=soc,
                   charge=charge, discharge=discharge,
                   annualization=scenario.annualization,
                   threshold=scenario.event_threshold_fraction)

    def _r(self, region: str) -> int:
        try:
            return self.region_ids.index(region)
        except ValueError:
            raise KeyError(f"unknown region '{region}'") from None

    def region_shed(self, region: str) -> np.ndarray:
        """Total shed MWh per hour over carriers and sectors."""
        return self.shed[self._r(region)].sum(axis=(0, 1))

    def region_demand(self, region: str) -> np.ndarray:
        return self.demand[self._r(region)].sum(axis=(0, 1))

    def net_export(self, region: str) -> np.ndarray:
        """MWh leaving the region minus MWh arriving (after losses),
        summed over links and carriers, per hour."""
        H = self.scenario.horizon_hours
        out = np.zeros(H)
        for link in self.scenario.links:
            if link.key not in self.flows:
                continue
            fwd, rev = self.flows[link.key]
            keep = 1.0 - link.loss_fraction
            if link.from_region == region:
                out += fwd - keep * rev
            elif link.to_region == region:
                out += rev - keep * fwd
        return out


def _threshold(d: DispatchResult, threshold_fraction: Optional[float]) -> float:
    value = d.threshold if threshold_fraction is None else threshold_fraction
    if not 0.0 <= value < 1.0:
        raise ValueError(f"threshold fraction must be in [0, 1), got {value}")
    return value


def loss_share(d: DispatchResult, region: str) -> float:
    """Percent of the region's demand that was not served; 0 if no demand."""
    total_demand = float(d.region_demand(region).sum())
    if total_demand <= 0.0:
        return 0.0
    return 100.0 * float(d.region_shed(region).sum()) / total_demand


def lole_hours(d: DispatchResult, region: str,
               threshold_fraction: Optional[float] = None) -> float:
    """Hours per year with shed above the threshold fraction of demand."""
    thr = _threshold(d, threshold_fraction)
    shed = d.region_shed(region)
    demand = d.region_demand(region)
    return float(np.count_nonzero(shed > thr * demand)) * d.annualization


def detect_events(d: DispatchResult, region: str,
                  threshold_fraction: Optional[float] = None,
                  year: int = 0) -> list[OutageEvent]:
    """Maximal runs of consecutive above-threshold hours, ordered by start.

    A run touching both horizon ends is merged into a single wrap-around
    event (consistent with the cyclic storage convention); it starts at its
    late-horizon hour and sorts last.
    """
    thr = _threshold(d, threshold_fraction)
    shed = d.region_shed(region)
    demand = d.region_demand(region)
    flags = shed > thr * demand
    H = flags.size
    if not flags.any():
        return []

    def make(start: int, hours: np.ndarray) -> OutageEvent:
        depths = shed[hours] / demand[hours]
        return OutageEvent(region=region, start=int(start),
                           duration=int(hours.size),
                           energy_mwh=float(shed[hours].sum()),
                           max_depth=float(depths.max()), year=year)

    if flags.all():
        return [make(0, np.arange(H))]
    padded = np.concatenate([[False], flags, [False]])
    starts = np.flatnonzero(padded[1:] & ~padded[:-1])
    ends = np.flatnonzero(~padded[1:] & padded[:-1])
    runs = [(int(s), np.arange(s, e)) for s, e in zip(starts, ends)]
    if len(runs) > 1 and flags[0] and flags[H - 1]:
        first_start, first_hours = runs[0]
        last_start, last_hours = runs[-1]
        runs = runs[1:-1]
        runs.append((last_start, np.concatenate([last_hours, first_hours])))
    return [make(s, hrs) for s, hrs in runs]


def depth_exceedance(d: DispatchResult, region: str,
                     levels: Sequence[float] = DEPTH_LEVELS
                     ) -> list[tuple[float, float]]:
    """(depth level, annualized hours with shed fraction >= level)."""
    shed = d.region_shed(region)
    demand = d.region_demand(region)
    with np.errstate(invalid="ignore", divide="ignore"):
        depth = np.where(demand > 0, shed / demand, 0.0)
    return [(float(level),
             float(np.count_nonzero(depth >= level)) * d.annualization)
            for level in levels]


def residual_load(d: DispatchResult, region: str, hour: int) -> float:
    """Electricity demand minus local generator dispatch, MW; negative
    values mark an exportable surplus."""
    r = d._r(region)
    H = d.scenario.horizon_hours
    if not 0 <= hour < H:
        raise KeyError(f"hour {hour} outside horizon 0..{H - 1}")
    el = CARRIERS.index("electricity")
    demand = float(d.demand[r, el, :, hour].sum())
    generation = 0.0
    for (rid, tid), series in d.dispatch.items():
        if rid == region and d.scenario.technology(tid).kind == "generator" \
                and d.scenario.technology(tid).carrier_out == "electricity":
            generation += float(series[hour])
    return demand - generation


@dataclass(frozen=True)
class LullExportRow:
    region: str
    voll: float                 # EUR/kWh
    residual_mwh: float         # residual load summed over the event window
    shed_mwh: float
    net_export_mwh: float


def lull_export_table(d: DispatchResult,
                      volls: dict[str, float]) -> list[LullExportRow]:
    """One row per (region, outage event window): the scatter behind the
    export-of-outages diagnosis (shed > 0 while net export > 0)."""
    rows = []
    for region in d.region_ids:
        events = detect_events(d, region)
        if not events:
            continue
        exports = d.net_export(region)
        for ev in events:
            hours = np.arange(ev.start, ev.start + ev.duration) \
                % d.scenario.horizon_hours
            residual = sum(residual_load(d, region, int(h)) for h in hours)
            rows.append(LullExportRow(
                region=region,
                voll=float(volls[region]),
                residual_mwh=float(residual),
                shed_mwh=ev.energy_mwh,
                net_export_mwh=float(exports[hours].sum()),
            ))
    return rows


@dataclass
class EventDiagnosis:
    event: OutageEvent
    tight_families: list[str]
    tight_rows: list[str]
    storage_energy_mwh: float     # discharged by storage over the window
    backup_energy_mwh: float      # produced by electricity-out converters

    @property
    def storage_fraction(self) -> float:
        total = self.storage_energy_mwh + self.backup_energy_mwh
        return self.storage_energy_mwh / total if total > 0 else 0.0

    @property
    def backup_fraction(self) -> float:
        total = self.storage_energy_mwh + self.backup_energy_mwh
        return self.backup_energy_mwh / total if total > 0 else 0.0


def binding_limit_diagnosis(d: DispatchResult, lp: LinearProgram,
                            x: np.ndarray,
                            tol: Optional[float] = None) -> list[EventDiagnosis]:
    """Which of the four capacity bound families is tight during each event.

    Checks converter availability, storage charge/discharge power, storage
    energy, and link flow rows for slack <= tol at event hours, and splits
    the event's balancing energy between storage discharge and backup
    conversion.
    """
    x = np.asarray(x, dtype=np.float64)
    if tol is None:
        tol = d.scenario.solver.feas_tol * max(
            1.0, float(np.abs(x).max(initial=0.0)))
    slack = lp.b_le - lp.a_le.matvec(x) if lp.n_le else np.zeros(0)
    le_names = lp.le_names()
    techs = {t.id: t for t in d.scenario.technologies}

    family_blocks = []
    for blk in lp.le_blocks:
        if blk.kind == "avl" and techs[blk.key[1]].kind == "converter":
            family_blocks.append(("converter_capacity", blk))
        elif blk.kind in ("chp", "dip"):
            family_blocks.append(("storage_power", blk))
        elif blk.kind == "sen":
            family_blocks.append(("storage_energy", blk))
        elif blk.kind == "fcp":
            family_blocks.append(("link_capacity", blk))

    out = []
    H = d.scenario.horizon_hours
    for region in d.region_ids:
        for ev in detect_events(d, region):
            hours = np.arange(ev.start, ev.start + ev.duration) % H
            families = []
            names = []
            for family, blk in family_blocks:
                rows = blk.start + hours
                tight = hours[slack[rows] <= tol]
                if tight.size:
                    if family not in families:
                        families.append(family)
                    names.extend(le_names[blk.start + int(h)] for h in tight)
            storage = sum(float(series[hours].sum())
                          for (rid, _), series in d.discharge.items()
                          if rid == region)
            backup = sum(
                float(series[hours].sum())
                for (rid, tid), series in d.dispatch.items()
                if rid == region and techs[tid].kind == "converter"
                and techs[tid].carrier_out == "electricity")
            out.append(EventDiagnosis(
                event=ev,
                tight_families=sorted(families),
                tight_rows=sorted(set(names)),
                storage_energy_mwh=storage,
                backup_energy_mwh=backup,
            ))
    return out


def sector_shed_energy(d: DispatchResult, region: str) -> dict[str, float]:
    """Shed MWh per sector over the horizon, both carriers pooled."""
    r = d._r(region)
    per_sector = d.shed[r].sum(axis=(0, 2))
    return {s: float(per_sector[k]) for k, s in enumerate(SECTORS)}


# --- consolidated report ---------------------------------------------------

@dataclass
class RegionReport:
    region: str
    loss_share_percent: float
    lole_hours_per_year: float
    events: list[OutageEvent]
    duration_histogram: dict[str, int]
    depth_exceedance: list[tuple[float, float]]
    sector_shed_mwh_per_year: dict[str, float]


@dataclass
class AdequacyReport:
    n_dispatches: int
    regions: dict[str, RegionReport]
    system_max_unserved_fraction: float
    system_hours_above_5pct_per_year: float
    region_volls: dict[str, float]
    lull_rows: list[LullExportRow] = field(default_factory=list)


def _histogram(events: list[OutageEvent]) -> dict[str, int]:
    """Duration bins: short < 5 h, 5 <= medium <= 10 h, long > 10 h."""
    bins = {"1_to_5": 0, "5_to_10": 0, "over_10": 0}
    for ev in events:
        if ev.duration < 5:
            bins["1_to_5"] += 1
        elif ev.duration <= 10:
            bins["5_to_10"] += 1
        else:
            bins["over_10"] += 1
    return bins


def build_report(dispatches: Sequence[DispatchResult]) -> AdequacyReport:
    """Aggregate metrics over one or more dispatches of the same system
    (weather years with fixed capacities): loss shares are pooled energy
    ratios, annualized metrics are averaged, events are concatenated."""
    if not dispatches:
        raise ValueError("need at least one dispatch")
    first = dispatches[0]
    region_ids = first.region_ids
    for d in dispatches:
        if d.region_ids != region_ids:
            raise ValueError("dispatches cover different region sets")
    n = len(dispatches)

    regions = {}
    for region in region_ids:
        shed_total = sum(float(d.region_shed(region).sum()) for d in dispatches)
        demand_total = sum(float(d.region_demand(region).sum())
                           for d in dispatches)
        share = 100.0 * shed_total / demand_total if demand_total > 0 else 0.0
        lole = sum(lole_hours(d, region) for d in dispatches) / n
        events = [ev for i, d in enumerate(dispatches)
                  for ev in detect_events(d, region, year=i)]
        curves = [depth_exceedance(d, region) for d in dispatches]
        curve = [(level, sum(c[k][1] for c in curves) / n)
                 for k, (level, _) in enumerate(curves[0])]
        sector = {
            s: sum(sector_shed_energy(d, region)[s] * d.annualization
                   for d in dispatches) / n
            for s in SECTORS
        }
        regions[region] = RegionReport(
            region=region, loss_share_percent=share,
            lole_hours_per_year=lole, events=events,
            duration_histogram=_histogram(events), depth_exceedance=curve,
            sector_shed_mwh_per_year=sector,
        )

    max_frac = 0.0
    above5 = 0.0
    for d in dispatches:
        shed = d.shed.sum(axis=(0, 1, 2))
        demand = d.demand.sum(axis=(0, 1, 2))
        with np.errstate(invalid="ignore", divide="ignore"):
            frac = np.where(demand > 0, shed / demand, 0.0)
        max_frac = max(max_frac, float(frac.max(initial=0.0)))
        above5 += float(np.count_nonzero(frac >= 0.05)) * d.annualization
    above5 /= n

    volls = {r.id: r.country_voll for r in first.scenario.regions}
    lull_rows = [row for d in dispatches for row in lull_export_table(d, volls)]
    return AdequacyReport(
        n_dispatches=n, regions=regions,
        system_max_unserved_fraction=max_frac,
        system_hours_above_5pct_per_year=above5,
        region_volls=volls, lull_rows=lull_rows,
    )


def write_report_files(report: AdequacyReport, out_dir: str | Path) -> list[str]:
    """Write report.json, events.csv, exceedance.csv and fig6.csv; returns
    the file names written."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    payload = {
        "n_dispatches": report.n_dispatches,
        "system": {
            "max_unserved_fraction": report.system_max_unserved_fraction,
            "hours_above_5_percent_per_year":
                report.system_hours_above_5pct_per_year,
        },
        "regions": {
            region: {
                "loss_share_percent": r.loss_share_percent,
                "lole_hours_per_year": r.lole_hours_per_year,
                "voll_eur_per_kwh": report.region_volls.get(region),
                "events": [
                    {"year": ev.year, "start": ev.start,
                     "duration_h": ev.duration, "energy_mwh": ev.energy_mwh,
                     "max_depth": ev.max_depth}
                    for ev in r.events
                ],
                "duration_histogram": r.duration_histogram,
                "depth_exceedance": [
                    {"level": level, "hours_per_year": hours}
                    for level, hours in r.depth_exceedance
                ],
                "sector_shed_mwh_per_year": r.sector_shed_mwh_per_year,
            }
            for region, r in sorted(report.regions.items())
        },
    }
    (out_dir / "report.json").write_text(
        json.dumps(round12_tree(payload), indent=2, sort_keys=True) + "\n",
        encoding="utf-8")
    written.append("report.json")

    with open(out_dir / "events.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["region", "start", "duration_h", "energy_mwh", "max_depth"])
        for region in sorted(report.regions):
            for ev in report.regions[region].events:
                w.writerow([region, ev.start, ev.duration,
                            fmt12(ev.energy_mwh), fmt12(ev.max_depth)])
    written.append("events.csv")

    with open(out_dir / "exceedance.csv", "w", newline="",
              encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["region", "level", "hours_per_year"])
        for region in sorted(report.regions):
            for level, hours in report.regions[region].depth_exceedance:
                w.writerow([region, fmt12(level), fmt12(hours)])
    written.append("exceedance.csv")

    with open(out_dir / "fig6.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["region", "voll", "residual_mwh", "shed_mwh",
                    "net_export_mwh"])
        for row in report.lull_rows:
            w.writerow([row.region, fmt12(row.voll), fmt12(row.residual_mwh),
                        fmt12(row.shed_mwh), fmt12(row.net_export_mwh)])
    written.append("fig6.csv")
    return written
