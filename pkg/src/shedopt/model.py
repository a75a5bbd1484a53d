"""Domain model of a multi-region energy system and scenario directory I/O.

A scenario directory holds regions, technologies, links, hourly capacity
factor profiles, hourly sectoral demand, and a run configuration.  Loading
resolves all cross references and fails loudly on structural problems;
semantic range checks are reported separately by :func:`validate`.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import voll as voll_mod
from ._format import fmt12

SECTORS = ("agriculture", "services", "households", "industry", "transport")
CARRIERS = ("electricity", "hydrogen")
TECH_KINDS = ("generator", "converter", "storage")

REGIONS_FILE = "regions.csv"
DEMAND_FILE = "sector_demand.csv"
TECH_FILE = "technologies.csv"
PROFILES_FILE = "profiles.csv"
LINKS_FILE = "links.csv"
CONFIG_FILE = "config.json"

_REGION_COLUMNS = ("id", "name", "country_voll_eur_per_kwh")
_DEMAND_COLUMNS = ("region", "carrier", "sector", "hour", "demand_mwh")
_TECH_COLUMNS = (
    "id", "kind", "carrier_in", "carrier_out", "efficiency",
    "capex_annual_eur_per_kw", "opex_var_eur_per_mwh", "capacity_max_mw",
    "energy_capex_annual_eur_per_kwh", "charge_eff", "discharge_eff",
)
_PROFILE_COLUMNS = ("region", "technology", "hour", "capacity_factor")
_LINK_COLUMNS = ("from", "to", "carrier", "capex_annual_eur_per_mw",
                 "loss_fraction", "capacity_max_mw")
_CONFIG_KEYS = ("horizon_hours", "hours_per_year", "solver",
                "event_threshold_fraction")
_SOLVER_KEYS = ("feas_tol", "opt_tol", "max_iters")


class ScenarioError(ValueError):
    """Structural problem in a scenario directory, located by file/line/column."""

    def __init__(self, file: str, message: str, line: int | None = None,
                 column: str | None = None):
        self.file = file
        self.line = line
        self.column = column
        where = file if line is None else f"{file}:{line}"
        if column is not None:
            where += f" (column '{column}')"
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True)
class Region:
    id: str
    name: str
    country_voll: float                      # EUR/kWh
    sector_voll: dict[str, float]            # sector -> EUR/kWh
    line: int = field(default=-1, compare=False, repr=False)


@dataclass(frozen=True)
class Technology:
    id: str
    kind: str                                # generator | converter | storage
    carrier_out: str
    carrier_in: Optional[str] = None
    efficiency: float = 1.0
    capex_annual: float = 0.0                # EUR per kW per year
    opex_var: float = 0.0                    # EUR per MWh of output
    capacity_max: Optional[float] = None     # MW
    energy_capex_annual: Optional[float] = None   # EUR per kWh per year
    charge_eff: Optional[float] = None
    discharge_eff: Optional[float] = None
    # Not representable in technologies.csv; settable programmatically.
    energy_to_power_ratio: Optional[float] = None
    energy_budget_mwh: Optional[float] = None     # MWh per year, dispatch cap
    line: int = field(default=-1, compare=False, repr=False)


@dataclass(frozen=True)
class Link:
    from_region: str
    to_region: str
    carrier: str
    capex_annual: float = 0.0                # EUR per MW per year
    loss_fraction: float = 0.0
    capacity_max: Optional[float] = None     # MW
    line: int = field(default=-1, compare=False, repr=False)

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.from_region, self.to_region, self.carrier)


@dataclass(frozen=True)
class SolverConfig:
    feas_tol: float = 1e-7
    opt_tol: float = 1e-7
    max_iters: int = 0                       # 0 = 200 * (rows + cols)


@dataclass(frozen=True)
class Scenario:
    """Immutable description of the system; safe to share across solves."""

    regions: tuple[Region, ...]
    technologies: tuple[Technology, ...]
    links: tuple[Link, ...]
    profiles: dict[tuple[str, str], np.ndarray]          # (region, tech) -> cf
    demand: dict[tuple[str, str, str], np.ndarray]       # (region, carrier, sector)
    horizon_hours: int
    hours_per_year: int = 8760
    solver: SolverConfig = SolverConfig()
    event_threshold_fraction: float = 1e-3

    @property
    def annualization(self) -> float:
        """Factor converting horizon totals to per-year figures."""
        return self.hours_per_year / self.horizon_hours

    @property
    def horizon_fraction(self) -> float:
        """Share of a year covered by the horizon; scales annual capacity cost."""
        return self.horizon_hours / self.hours_per_year

    def region(self, region_id: str) -> Region:
        for r in self.regions:
            if r.id == region_id:
                return r
        raise KeyError(f"unknown region '{region_id}'")

    def technology(self, tech_id: str) -> Technology:
        for t in self.technologies:
            if t.id == tech_id:
                return t
        raise KeyError(f"unknown technology '{tech_id}'")

    def region_demand(self, region_id: str) -> np.ndarray:
        """Total demand per hour over carriers and sectors, MWh."""
        total = np.zeros(self.horizon_hours)
        for (r, _, _), series in self.demand.items():
            if r == region_id:
                total = total + series
        return total

    def with_scaled_volls(self, factor: float) -> "Scenario":
        """Copy with every country and sector VoLL multiplied by ``factor``."""
        scaled = tuple(
            replace(r, country_voll=r.country_voll * factor,
                    sector_voll={s: v * factor for s, v in r.sector_voll.items()})
            for r in self.regions
        )
        return replace(self, regions=scaled)


@dataclass(frozen=True)
class Violation:
    severity: str        # "error" | "warning"
    location: str
    message: str


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def _read_rows(path: Path, filename: str, columns: tuple[str, ...]):
    fpath = path / filename
    if not fpath.exists():
        raise ScenarioError(filename, "missing file")
    with open(fpath, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        got = tuple(reader.fieldnames or ())
        for col in got:
            if col not in columns:
                raise ScenarioError(filename, f"unknown column '{col}'", line=1)
        for col in columns:
            if col not in got:
                raise ScenarioError(filename, f"missing column '{col}'", line=1)
        for lineno, row in enumerate(reader, start=2):
            if None in row.values():
                raise ScenarioError(filename, "row has fewer cells than header",
                                    line=lineno)
            if None in row:
                raise ScenarioError(filename, "row has more cells than header",
                                    line=lineno)
            yield lineno, row


def _parse_float(filename: str, lineno: int, column: str, text: str,
                 optional: bool = False) -> Optional[float]:
    text = text.strip()
    if text == "":
        if optional:
            return None
        raise ScenarioError(filename, "empty value", line=lineno, column=column)
    try:
        value = float(text)
    except ValueError:
        raise ScenarioError(filename, f"malformed number '{text}'",
                            line=lineno, column=column) from None
    if not math.isfinite(value):
        raise ScenarioError(filename, f"non-finite number '{text}'",
                            line=lineno, column=column)
    return value


def _parse_int(filename: str, lineno: int, column: str, text: str) -> int:
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        raise ScenarioError(filename, f"malformed integer '{text}'",
                            line=lineno, column=column) from None


def _parse_id(filename: str, lineno: int, column: str, text: str) -> str:
    ident = text.strip()
    if not ident:
        raise ScenarioError(filename, "empty identifier", line=lineno, column=column)
    if any(ch.isspace() for ch in ident) or "," in ident:
        raise ScenarioError(filename, f"identifier '{ident}' contains "
                            "whitespace or comma", line=lineno, column=column)
    return ident


def _parse_choice(filename, lineno, column, text, choices, optional=False):
    text = text.strip()
    if text == "" and optional:
        return None
    if text not in choices:
        raise ScenarioError(filename, f"'{text}' is not one of {sorted(choices)}",
                            line=lineno, column=column)
    return text


def _collect_series(entries: dict, horizon: int, filename: str,
                    what: str) -> dict:
    """Turn {key: {hour: (value, line)}} into dense arrays of length horizon."""
    out = {}
    for key, hours in entries.items():
        series = np.zeros(horizon)
        for h, (value, lineno) in hours.items():
            if h < 0 or h >= horizon:
                raise ScenarioError(filename, f"hour {h} outside horizon "
                                    f"0..{horizon - 1} for {what} {key}",
                                    line=lineno, column="hour")
            series[h] = value
        missing = horizon - len(hours)
        if missing:
            first = next(h for h in range(horizon) if h not in hours)
            raise ScenarioError(filename, f"{what} {key} is missing hour {first} "
                                f"({missing} of {horizon} hours absent)")
        out[key] = _freeze(series)
    return out


def _sector_weights(demand: dict, region_id: str) -> dict[str, float]:
    """Share of each sector in the region's total demand over both carriers."""
    totals = {s: 0.0 for s in SECTORS}
    for (r, _, s), series in demand.items():
        if r == region_id:
            totals[s] += float(series.sum())
    grand = sum(totals.values())
    if grand <= 0.0:
        return {s: 1.0 / len(SECTORS) for s in SECTORS}
    return {s: totals[s] / grand for s in SECTORS}


def load_scenario(path: str | Path) -> Scenario:
    """Load and cross-link a scenario directory.

    Structural problems (missing files, unknown columns, dangling ids,
    malformed numbers, non-dense hours) raise :class:`ScenarioError` with
    file, line and column.  Range violations are left to :func:`validate`.
    """
    path = Path(path)
    config = _load_config(path)
    horizon = config["horizon_hours"]

    regions_raw = []
    region_ids = set()
    for lineno, row in _read_rows(path, REGIONS_FILE, _REGION_COLUMNS):
        rid = _parse_id(REGIONS_FILE, lineno, "id", row["id"])
        if rid in region_ids:
            raise ScenarioError(REGIONS_FILE, f"duplicate region id '{rid}'",
                                line=lineno, column="id")
        region_ids.add(rid)
        voll = _parse_float(REGIONS_FILE, lineno, "country_voll_eur_per_kwh",
                            row["country_voll_eur_per_kwh"])
        regions_raw.append((rid, row["name"].strip(), voll, lineno))

    technologies = []
    tech_ids = set()
    for lineno, row in _read_rows(path, TECH_FILE, _TECH_COLUMNS):
        tid = _parse_id(TECH_FILE, lineno, "id", row["id"])
        if tid in tech_ids:
            raise ScenarioError(TECH_FILE, f"duplicate technology id '{tid}'",
                                line=lineno, column="id")
        tech_ids.add(tid)
        kind = _parse_choice(TECH_FILE, lineno, "kind", row["kind"], TECH_KINDS)
        technologies.append(Technology(
            id=tid,
            kind=kind,
            carrier_in=_parse_choice(TECH_FILE, lineno, "carrier_in",
                                     row["carrier_in"], CARRIERS, optional=True),
            carrier_out=_parse_choice(TECH_FILE, lineno, "carrier_out",
                                      row["carrier_out"], CARRIERS),
            efficiency=_parse_float(TECH_FILE, lineno, "efficiency",
                                    row["efficiency"], optional=True) or 1.0,
            capex_annual=_parse_float(TECH_FILE, lineno,
                                      "capex_annual_eur_per_kw",
                                      row["capex_annual_eur_per_kw"]),
            opex_var=_parse_float(TECH_FILE, lineno, "opex_var_eur_per_mwh",
                                  row["opex_var_eur_per_mwh"], optional=True) or 0.0,
            capacity_max=_parse_float(TECH_FILE, lineno, "capacity_max_mw",
                                      row["capacity_max_mw"], optional=True),
            energy_capex_annual=_parse_float(TECH_FILE, lineno,
                                             "energy_capex_annual_eur_per_kwh",
                                             row["energy_capex_annual_eur_per_kwh"],
                                             optional=True),
            charge_eff=_parse_float(TECH_FILE, lineno, "charge_eff",
                                    row["charge_eff"], optional=True),
            discharge_eff=_parse_float(TECH_FILE, lineno, "discharge_eff",
                                       row["discharge_eff"], optional=True),
            line=lineno,
        ))

    links = []
    if (path / LINKS_FILE).exists():
        seen_links = set()
        for lineno, row in _read_rows(path, LINKS_FILE, _LINK_COLUMNS):
            frm = _parse_id(LINKS_FILE, lineno, "from", row["from"])
            to = _parse_id(LINKS_FILE, lineno, "to", row["to"])
            carrier = _parse_choice(LINKS_FILE, lineno, "carrier",
                                    row["carrier"], CARRIERS)
            for col, rid in (("from", frm), ("to", to)):
                if rid not in region_ids:
                    raise ScenarioError(LINKS_FILE, f"unknown region '{rid}'",
                                        line=lineno, column=col)
            key = (frm, to, carrier)
            if key in seen_links or (to, frm, carrier) in seen_links:
                raise ScenarioError(LINKS_FILE, f"duplicate link {key}",
                                    line=lineno)
            seen_links.add(key)
            links.append(Link(
                from_region=frm, to_region=to, carrier=carrier,
                capex_annual=_parse_float(LINKS_FILE, lineno,
                                          "capex_annual_eur_per_mw",
                                          row["capex_annual_eur_per_mw"]),
                loss_fraction=_parse_float(LINKS_FILE, lineno, "loss_fraction",
                                           row["loss_fraction"]),
                capacity_max=_parse_float(LINKS_FILE, lineno, "capacity_max_mw",
                                          row["capacity_max_mw"], optional=True),
                line=lineno,
            ))

    profile_entries: dict[tuple[str, str], dict[int, tuple[float, int]]] = {}
    for lineno, row in _read_rows(path, PROFILES_FILE, _PROFILE_COLUMNS):
        rid = row["region"].strip()
        tid = row["technology"].strip()
        if rid not in region_ids:
            raise ScenarioError(PROFILES_FILE, f"unknown region '{rid}'",
                                line=lineno, column="region")
        if tid not in tech_ids:
            raise ScenarioError(PROFILES_FILE, f"unknown technology '{tid}'",
                                line=lineno, column="technology")
        hour = _parse_int(PROFILES_FILE, lineno, "hour", row["hour"])
        cf = _parse_float(PROFILES_FILE, lineno, "capacity_factor",
                          row["capacity_factor"])
        bucket = profile_entries.setdefault((rid, tid), {})
        if hour in bucket:
            raise ScenarioError(PROFILES_FILE, f"duplicate hour {hour} for "
                                f"({rid}, {tid})", line=lineno, column="hour")
        bucket[hour] = (cf, lineno)
    profiles = _collect_series(profile_entries, horizon, PROFILES_FILE, "profile")

    demand_entries: dict[tuple[str, str, str], dict[int, tuple[float, int]]] = {}
    for lineno, row in _read_rows(path, DEMAND_FILE, _DEMAND_COLUMNS):
        rid = row["region"].strip()
        if rid not in region_ids:
            raise ScenarioError(DEMAND_FILE, f"unknown region '{rid}'",
                                line=lineno, column="region")
        carrier = _parse_choice(DEMAND_FILE, lineno, "carrier", row["carrier"],
                                CARRIERS)
        sector = _parse_choice(DEMAND_FILE, lineno, "sector", row["sector"],
                               SECTORS)
        hour = _parse_int(DEMAND_FILE, lineno, "hour", row["hour"])
        value = _parse_float(DEMAND_FILE, lineno, "demand_mwh", row["demand_mwh"])
        bucket = demand_entries.setdefault((rid, carrier, sector), {})
        if hour in bucket:
            raise ScenarioError(DEMAND_FILE, f"duplicate hour {hour} for "
                                f"({rid}, {carrier}, {sector})",
                                line=lineno, column="hour")
        bucket[hour] = (value, lineno)
    demand = _collect_series(demand_entries, horizon, DEMAND_FILE, "demand series")

    regions = []
    for rid, name, country_voll, lineno in regions_raw:
        weights = _sector_weights(demand, rid)
        sector_voll = voll_mod.sectoral_volls(country_voll, weights) \
            if country_voll > 0 else {s: 0.0 for s in SECTORS}
        regions.append(Region(id=rid, name=name, country_voll=country_voll,
                              sector_voll=sector_voll, line=lineno))

    return Scenario(
        regions=tuple(regions),
        technologies=tuple(technologies),
        links=tuple(links),
        profiles=profiles,
        demand=demand,
        horizon_hours=horizon,
        hours_per_year=config["hours_per_year"],
        solver=config["solver"],
        event_threshold_fraction=config["event_threshold_fraction"],
    )


def _load_config(path: Path) -> dict:
    fpath = path / CONFIG_FILE
    if not fpath.exists():
        raise ScenarioError(CONFIG_FILE, "missing file")
    try:
        raw = json.loads(fpath.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioError(CONFIG_FILE, f"invalid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ScenarioError(CONFIG_FILE, "top level must be an object")
    for key in raw:
        if key not in _CONFIG_KEYS:
            raise ScenarioError(CONFIG_FILE, f"unknown key '{key}'")
    if "horizon_hours" not in raw:
        raise ScenarioError(CONFIG_FILE, "missing key 'horizon_hours'")
    horizon = raw["horizon_hours"]
    if not isinstance(horizon, int) or horizon < 1:
        raise ScenarioError(CONFIG_FILE, "horizon_hours must be an integer >= 1")
    hours_per_year = raw.get("hours_per_year", 8760)
    if not isinstance(hours_per_year, int) or hours_per_year < 1:
        raise ScenarioError(CONFIG_FILE, "hours_per_year must be an integer >= 1")
    solver_raw = raw.get("solver", {})
    if not isinstance(solver_raw, dict):
        raise ScenarioError(CONFIG_FILE, "'solver' must be an object")
    for key in solver_raw:
        if key not in _SOLVER_KEYS:
            raise ScenarioError(CONFIG_FILE, f"unknown solver key '{key}'")
    solver = SolverConfig(
        feas_tol=float(solver_raw.get("feas_tol", 1e-7)),
        opt_tol=float(solver_raw.get("opt_tol", 1e-7)),
        max_iters=int(solver_raw.get("max_iters", 0)),
    )
    if solver.feas_tol <= 0 or solver.opt_tol <= 0:
        raise ScenarioError(CONFIG_FILE, "solver tolerances must be > 0")
    threshold = float(raw.get("event_threshold_fraction", 1e-3))
    if not 0.0 <= threshold < 1.0:
        raise ScenarioError(CONFIG_FILE,
                            "event_threshold_fraction must be in [0, 1)")
    return {"horizon_hours": horizon, "hours_per_year": hours_per_year,
            "solver": solver, "event_threshold_fraction": threshold}


def validate(scenario: Scenario) -> list[Violation]:
    """Check all type invariants; returns violations, empty when clean.

    Ordering is deterministic: regions, technologies, links, profiles,
    demand, then whole-scenario checks, each in load order.
    """
    out: list[Violation] = []
    err = lambda loc, msg: out.append(Violation("error", loc, msg))
    warn = lambda loc, msg: out.append(Violation("warning", loc, msg))

    for r in scenario.regions:
        loc = f"{REGIONS_FILE}:{r.line}" if r.line > 0 else REGIONS_FILE
        if r.country_voll <= 0:
            err(loc, f"region '{r.id}': country VoLL must be > 0, "
                f"got {r.country_voll}")
            continue
        bad = [s for s, v in r.sector_voll.items() if v <= 0]
        if bad:
            err(loc, f"region '{r.id}': non-positive sectoral VoLL for {bad}")
        weights = _sector_weights(scenario.demand, r.id)
        mean = sum(weights[s] * r.sector_voll.get(s, 0.0) for s in SECTORS)
        if abs(mean - r.country_voll) > 1e-9 * max(1.0, abs(r.country_voll)):
            err(loc, f"region '{r.id}': demand-weighted sectoral VoLL mean "
                f"{mean!r} != country VoLL {r.country_voll!r}")

    for t in scenario.technologies:
        loc = f"{TECH_FILE}:{t.line}" if t.line > 0 else TECH_FILE
        if not 0.0 < t.efficiency <= 1.0:
            err(loc, f"technology '{t.id}': efficiency must be in (0, 1], "
                f"got {t.efficiency}")
        for name, eff in (("charge_eff", t.charge_eff),
                          ("discharge_eff", t.discharge_eff)):
            if eff is not None and not 0.0 < eff <= 1.0:
                err(loc, f"technology '{t.id}': {name} must be in (0, 1], "
                    f"got {eff}")
        for name, cost in (("capex_annual_eur_per_kw", t.capex_annual),
                           ("opex_var_eur_per_mwh", t.opex_var),
                           ("energy_capex_annual_eur_per_kwh",
                            t.energy_capex_annual)):
            if cost is not None and cost < 0:
                err(loc, f"technology '{t.id}': {name} must be >= 0, got {cost}")
        if t.kind == "generator" and t.carrier_in is not None:
            err(loc, f"generator '{t.id}' must not have carrier_in")
        if t.kind == "converter":
            if t.carrier_in is None:
                err(loc, f"converter '{t.id}' requires carrier_in")
            elif t.carrier_in == t.carrier_out:
                err(loc, f"converter '{t.id}' must have carrier_in != carrier_out")
        if t.kind == "storage" and t.carrier_in not in (None, t.carrier_out):
            err(loc, f"storage '{t.id}' must store a single carrier")
        if t.capacity_max is not None and t.capacity_max < 0:
            err(loc, f"technology '{t.id}': capacity_max_mw must be >= 0")
        if t.energy_to_power_ratio is not None and t.energy_to_power_ratio <= 0:
            err(loc, f"technology '{t.id}': energy_to_power_ratio must be > 0")

    for l in scenario.links:
        loc = f"{LINKS_FILE}:{l.line}" if l.line > 0 else LINKS_FILE
        if l.from_region == l.to_region:
            err(loc, f"link {l.key}: endpoints must differ")
        if not 0.0 <= l.loss_fraction < 1.0:
            err(loc, f"link {l.key}: loss_fraction must be in [0, 1), "
                f"got {l.loss_fraction}")
        if l.capex_annual < 0:
            err(loc, f"link {l.key}: capex_annual_eur_per_mw must be >= 0")
        if l.capacity_max is not None and l.capacity_max < 0:
            err(loc, f"link {l.key}: capacity_max_mw must be >= 0")

    kinds = {t.id: t.kind for t in scenario.technologies}
    for (rid, tid), series in scenario.profiles.items():
        if len(series) != scenario.horizon_hours:
            err(PROFILES_FILE, f"profile ({rid}, {tid}) length {len(series)} "
                f"!= horizon {scenario.horizon_hours}")
        low = np.flatnonzero(series < 0.0)
        high = np.flatnonzero(series > 1.0)
        for h in low[:1]:
            err(PROFILES_FILE, f"profile ({rid}, {tid}) hour {h}: capacity "
                f"factor {series[h]!r} < 0")
        for h in high[:1]:
            err(PROFILES_FILE, f"profile ({rid}, {tid}) hour {h}: capacity "
                f"factor {series[h]!r} > 1")
        if kinds.get(tid) != "generator":
            warn(PROFILES_FILE, f"profile ({rid}, {tid}) targets a "
                 f"{kinds.get(tid)}; capacity factors only apply to generators")

    for (rid, carrier, sector), series in scenario.demand.items():
        if len(series) != scenario.horizon_hours:
            err(DEMAND_FILE, f"demand ({rid}, {carrier}, {sector}) length "
                f"{len(series)} != horizon {scenario.horizon_hours}")
        neg = np.flatnonzero(series < 0.0)
        for h in neg[:1]:
            err(DEMAND_FILE, f"demand ({rid}, {carrier}, {sector}) hour {h}: "
                f"value {series[h]!r} < 0")

    # Supply reachability: a region with demand should have local options or links.
    linked = set()
    for l in scenario.links:
        linked.add(l.from_region)
        linked.add(l.to_region)
    has_non_generator = any(t.kind != "generator" for t in scenario.technologies)
    for r in scenario.regions:
        if scenario.region_demand(r.id).sum() <= 0:
            continue
        has_profile = any(rid == r.id for (rid, _) in scenario.profiles)
        if not has_profile and not has_non_generator and r.id not in linked:
            warn(REGIONS_FILE, f"region '{r.id}' has demand but no local "
                 "supply options and no links; all demand must be shed")
    return out


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    """Write the scenario back out; inverse of :func:`load_scenario`."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    fmt = fmt12

    with open(path / REGIONS_FILE, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(_REGION_COLUMNS)
        for r in scenario.regions:
            w.writerow([r.id, r.name, fmt(r.country_voll)])

    with open(path / TECH_FILE, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(_TECH_COLUMNS)
        for t in scenario.technologies:
            w.writerow([
                t.id, t.kind, t.carrier_in or "", t.carrier_out,
                fmt(t.efficiency), fmt(t.capex_annual), fmt(t.opex_var),
                "" if t.capacity_max is None else fmt(t.capacity_max),
                "" if t.energy_capex_annual is None else fmt(t.energy_capex_annual),
                "" if t.charge_eff is None else fmt(t.charge_eff),
                "" if t.discharge_eff is None else fmt(t.discharge_eff),
            ])

    with open(path / LINKS_FILE, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(_LINK_COLUMNS)
        for l in scenario.links:
            w.writerow([
                l.from_region, l.to_region, l.carrier, fmt(l.capex_annual),
                fmt(l.loss_fraction),
                "" if l.capacity_max is None else fmt(l.capacity_max),
            ])

    with open(path / PROFILES_FILE, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(_PROFILE_COLUMNS)
        for (rid, tid) in sorted(scenario.profiles):
            series = scenario.profiles[(rid, tid)]
            for h in range(scenario.horizon_hours):
                w.writerow([rid, tid, h, fmt(series[h])])

    with open(path / DEMAND_FILE, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(_DEMAND_COLUMNS)
        for (rid, carrier, sector) in sorted(scenario.demand):
            series = scenario.demand[(rid, carrier, sector)]
            for h in range(scenario.horizon_hours):
                w.writerow([rid, carrier, sector, h, fmt(series[h])])

    config = {
        "horizon_hours": scenario.horizon_hours,
        "hours_per_year": scenario.hours_per_year,
        "solver": {"feas_tol": scenario.solver.feas_tol,
                   "opt_tol": scenario.solver.opt_tol,
                   "max_iters": scenario.solver.max_iters},
        "event_threshold_fraction": scenario.event_threshold_fraction,
    }
    (path / CONFIG_FILE).write_text(
        json.dumps(config, indent=2, sort_keys=True) + "\n", encoding="utf-8")


