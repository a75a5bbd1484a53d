"""Translate a scenario into a sparse linear program.

Variables cover capacities, hourly dispatch, storage operation, link flows
and per-sector load shedding; shedding is priced at the sectoral VoLL so
the optimizer trades supply cost against outage cost.  Single-variable
limits (shed <= demand, capacity <= cap) live in the variable bounds;
multi-variable limits form the inequality system.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._sparse import SparseMatrix, TripletBuilder
from .model import CARRIERS, Scenario, validate

CARRIER_CODE = {"electricity": "E", "hydrogen": "H"}
SECTOR_CODE = {"agriculture": "agr", "services": "srv", "households": "hou",
               "industry": "ind", "transport": "tra"}


class BuildError(ValueError):
    pass


@dataclass(frozen=True)
class VarBlock:
    kind: str          # cap | ecap | lcap | dsp | chg | dis | soc | flw | shd
    key: tuple
    start: int
    count: int

    @property
    def stop(self) -> int:
        return self.start + self.count


@dataclass(frozen=True)
class RowBlock:
    kind: str          # bal | dyn | avl | chp | dip | sen | fcp | e2p | bgt | stb
    key: tuple
    start: int
    count: int

    @property
    def stop(self) -> int:
        return self.start + self.count


class VariableCatalog:
    """Maps dense variable indices to their semantic meaning."""

    def __init__(self, blocks: list[VarBlock], names: list[str]):
        self.blocks = tuple(blocks)
        self.names = tuple(names)
        self.n = len(names)
        self._index = {(b.kind, b.key): b for b in blocks}
        if len(self._index) != len(blocks):
            raise BuildError("duplicate variable block keys")
        if len(set(names)) != len(names):
            raise BuildError("variable names collide; check that region and "
                             "technology ids do not fold together under '_'")

    def block(self, kind: str, key: tuple) -> VarBlock:
        try:
            return self._index[(kind, key)]
        except KeyError:
            raise KeyError(f"no variable block ({kind}, {key})") from None

    def has_block(self, kind: str, key: tuple) -> bool:
        return (kind, key) in self._index

    def blocks_of(self, kind: str) -> list[VarBlock]:
        return [b for b in self.blocks if b.kind == kind]

    def name_to_index(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.names)}


@dataclass
class LinearProgram:
    """min c.x  s.t.  a_eq.x = b_eq,  a_le.x <= b_le,  lb <= x <= ub."""

    c: np.ndarray
    a_eq: SparseMatrix
    b_eq: np.ndarray
    a_le: SparseMatrix
    b_le: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    catalog: Optional[VariableCatalog] = None
    eq_blocks: tuple[RowBlock, ...] = ()
    le_blocks: tuple[RowBlock, ...] = ()
    # Hint only: nonbasic start position that is feasible by construction
    # (shed at its demand bound); never changes the solution set.
    start_at_upper: Optional[np.ndarray] = None
    _eq_names: Optional[list[str]] = field(default=None, repr=False)
    _le_names: Optional[list[str]] = field(default=None, repr=False)

    @property
    def n_vars(self) -> int:
        return self.c.size

    @property
    def n_eq(self) -> int:
        return self.b_eq.size

    @property
    def n_le(self) -> int:
        return self.b_le.size

    def eq_names(self) -> list[str]:
        if self._eq_names is None:
            self._eq_names = _row_names(self.eq_blocks, self.n_eq, "EQ")
        return self._eq_names

    def le_names(self) -> list[str]:
        if self._le_names is None:
            self._le_names = _row_names(self.le_blocks, self.n_le, "LE")
        return self._le_names


def _var_name(kind: str, key: tuple, h: int | None = None) -> str:
    if kind == "cap":
        return f"CAP_{key[0]}_{key[1]}"
    if kind == "ecap":
        return f"ECAP_{key[0]}_{key[1]}"
    if kind == "lcap":
        a, b, c = key
        return f"LCAP_{a}_{b}_{CARRIER_CODE[c]}"
    if kind in ("dsp", "chg", "dis", "soc"):
        return f"{kind.upper()}_{key[0]}_{key[1]}_{h}"
    if kind == "flw":
        (a, b, c), direction = key
        return f"FLW_{a}_{b}_{CARRIER_CODE[c]}_{direction}_{h}"
    if kind == "shd":
        r, c, s = key
        return f"SHD_{r}_{CARRIER_CODE[c]}_{SECTOR_CODE[s]}_{h}"
    raise ValueError(f"unknown variable kind '{kind}'")


_ROW_PREFIX = {"bal": "BAL", "dyn": "DYN", "avl": "AVL", "chp": "CHP",
               "dip": "DIP", "sen": "SEN", "fcp": "FCP", "e2p": "E2P",
               "bgt": "BGT", "stb": "STB"}


def _row_name(kind: str, key: tuple, h: int | None = None) -> str:
    prefix = _ROW_PREFIX[kind]
    if kind == "bal":
        return f"{prefix}_{key[0]}_{CARRIER_CODE[key[1]]}_{h}"
    if kind == "fcp":
        (a, b, c), direction = key
        return f"{prefix}_{a}_{b}_{CARRIER_CODE[c]}_{direction}_{h}"
    if kind in ("e2p", "bgt"):
        return f"{prefix}_{key[0]}_{key[1]}"
    if kind == "stb":
        return f"{prefix}_{key[0]}"
    return f"{prefix}_{key[0]}_{key[1]}_{h}"


def _row_names(blocks: tuple[RowBlock, ...], total: int,
               fallback_prefix: str) -> list[str]:
    if not blocks:
        return [f"{fallback_prefix}_{i}" for i in range(total)]
    names: list[str] = []
    for blk in blocks:
        if blk.count == 1 and blk.kind in ("e2p", "bgt", "stb"):
            names.append(_row_name(blk.kind, blk.key))
        else:
            names.extend(_row_name(blk.kind, blk.key, h)
                         for h in range(blk.count))
    if len(names) != total:
        raise AssertionError("row name bookkeeping out of sync")
    return names


def build(scenario: Scenario) -> LinearProgram:
    """Assemble the LP for one scenario.  Deterministic: identical scenarios
    produce identical ordering and coefficients."""
    problems = [v for v in validate(scenario) if v.severity == "error"]
    if problems:
        lines = "; ".join(f"{v.location}: {v.message}" for v in problems[:5])
        raise BuildError(f"scenario has {len(problems)} validation error(s): "
                         f"{lines}")

    H = scenario.horizon_hours
    frac = scenario.horizon_fraction
    region_ids = sorted(r.id for r in scenario.regions)
    regions = {r.id: r for r in scenario.regions}
    techs = {t.id: t for t in scenario.technologies}

    gen_sites = sorted((r, t) for (r, t) in scenario.profiles
                       if techs[t].kind == "generator")
    conv_sites = sorted((r, t.id) for r in region_ids
                        for t in scenario.technologies if t.kind == "converter")
    stor_sites = sorted((r, t.id) for r in region_ids
                        for t in scenario.technologies if t.kind == "storage")
    link_keys = sorted(l.key for l in scenario.links)
    links = {l.key: l for l in scenario.links}
    shed_keys = sorted(scenario.demand)

    # --- variable catalog ---------------------------------------------
    blocks: list[VarBlock] = []
    names: list[str] = []

    def add_block(kind: str, key: tuple, count: int, hourly: bool):
        start = len(names)
        blocks.append(VarBlock(kind, key, start, count))
        if hourly:
            names.extend(_var_name(kind, key, h) for h in range(count))
        else:
            names.append(_var_name(kind, key))

    for site in gen_sites + conv_sites + stor_sites:
        add_block("cap", site, 1, hourly=False)
    for site in stor_sites:
        add_block("ecap", site, 1, hourly=False)
    for key in link_keys:
        add_block("lcap", key, 1, hourly=False)
    for site in sorted(gen_sites + conv_sites):
        add_block("dsp", site, H, hourly=True)
    for kind in ("chg", "dis", "soc"):
        for site in stor_sites:
            add_block(kind, site, H, hourly=True)
    for key in link_keys:
        for direction in ("F", "R"):
            add_block("flw", (key, direction), H, hourly=True)
    for key in shed_keys:
        add_block("shd", key, H, hourly=True)

    catalog = VariableCatalog(blocks, names)
    n = catalog.n
    hours = np.arange(H)

    c = np.zeros(n)
    lb = np.zeros(n)
    ub = np.full(n, np.inf)
    start_at_upper = np.zeros(n, dtype=bool)

    for blk in catalog.blocks:
        if blk.kind == "cap":
            tech = techs[blk.key[1]]
            c[blk.start] = 1000.0 * tech.capex_annual * frac
            if tech.capacity_max is not None:
                ub[blk.start] = tech.capacity_max
        elif blk.kind == "ecap":
            tech = techs[blk.key[1]]
            if tech.energy_capex_annual:
                c[blk.start] = 1000.0 * tech.energy_capex_annual * frac
        elif blk.kind == "lcap":
            link = links[blk.key]
            c[blk.start] = link.capex_annual * frac
            if link.capacity_max is not None:
                ub[blk.start] = link.capacity_max
        elif blk.kind == "dsp":
            c[blk.start:blk.stop] = techs[blk.key[1]].opex_var
        elif blk.kind == "dis":
            c[blk.start:blk.stop] = techs[blk.key[1]].opex_var
        elif blk.kind == "shd":
            r, _, sector = blk.key
            c[blk.start:blk.stop] = regions[r].sector_voll[sector] * 1000.0
            demand = scenario.demand[blk.key]
            ub[blk.start:blk.stop] = demand
            start_at_upper[blk.start:blk.stop] = True

    # --- which (region, carrier) nodes exist --------------------------
    active: set[tuple[str, str]] = set()
    for key in shed_keys:
        active.add((key[0], key[1]))
    for r, t in gen_sites:
        active.add((r, techs[t].carrier_out))
    for r, t in conv_sites:
        active.add((r, techs[t].carrier_out))
        active.add((r, techs[t].carrier_in))
    for r, t in stor_sites:
        active.add((r, techs[t].carrier_out))
    for a, b, carrier in link_keys:
        active.add((a, carrier))
        active.add((b, carrier))
    bal_keys = sorted(active, key=lambda rc: (rc[0], CARRIERS.index(rc[1])))

    # --- equality system: balances then storage dynamics --------------
    eq_blocks: list[RowBlock] = []
    eq_rows = 0

    def add_eq_block(kind, key, count):
        nonlocal eq_rows
        eq_blocks.append(RowBlock(kind, key, eq_rows, count))
        eq_rows += count

    for key in bal_keys:
        add_eq_block("bal", key, H)
    for site in stor_sites:
        add_eq_block("dyn", site, H)

    bal_start = {blk.key: blk.start for blk in eq_blocks if blk.kind == "bal"}
    eq = TripletBuilder()
    b_eq = np.zeros(eq_rows)

    for r, t in gen_sites:
        rows = bal_start[(r, techs[t].carrier_out)] + hours
        dsp = catalog.block("dsp", (r, t))
        eq.add_many(rows, dsp.start + hours, 1.0)
    for r, t in conv_sites:
        tech = techs[t]
        dsp = catalog.block("dsp", (r, t))
        out_key = (r, tech.carrier_out)
        if out_key in bal_start:
            eq.add_many(bal_start[out_key] + hours, dsp.start + hours, 1.0)
        in_key = (r, tech.carrier_in)
        if in_key in bal_start:
            eq.add_many(bal_start[in_key] + hours, dsp.start + hours,
                        -1.0 / tech.efficiency)
    for r, t in stor_sites:
        key = (r, techs[t].carrier_out)
        if key not in bal_start:
            continue
        rows = bal_start[key] + hours
        eq.add_many(rows, catalog.block("dis", (r, t)).start + hours, 1.0)
        eq.add_many(rows, catalog.block("chg", (r, t)).start + hours, -1.0)
    for key in link_keys:
        link = links[key]
        keep = 1.0 - link.loss_fraction
        fwd = catalog.block("flw", (key, "F"))
        rev = catalog.block("flw", (key, "R"))
        rows_from = bal_start[(link.from_region, link.carrier)] + hours
        rows_to = bal_start[(link.to_region, link.carrier)] + hours
        eq.add_many(rows_from, fwd.start + hours, -1.0)
        eq.add_many(rows_from, rev.start + hours, keep)
        eq.add_many(rows_to, fwd.start + hours, keep)
        eq.add_many(rows_to, rev.start + hours, -1.0)
    for key in shed_keys:
        r, carrier, _ = key
        rows = bal_start[(r, carrier)] + hours
        shd = catalog.block("shd", key)
        eq.add_many(rows, shd.start + hours, 1.0)
        b_eq[rows] += scenario.demand[key]

    dyn_start = {blk.key: blk.start for blk in eq_blocks if blk.kind == "dyn"}
    for r, t in stor_sites:
        tech = techs[t]
        eta_c = tech.charge_eff if tech.charge_eff is not None else 1.0
        eta_d = tech.discharge_eff if tech.discharge_eff is not None else 1.0
        rows = dyn_start[(r, t)] + hours
        soc = catalog.block("soc", (r, t))
        # soc(h+1) - soc(h) - eta_c*chg(h) + dis(h)/eta_d = 0, cyclic wrap
        eq.add_many(rows, soc.start + (hours + 1) % H, 1.0)
        eq.add_many(rows, soc.start + hours, -1.0)
        eq.add_many(rows, catalog.block("chg", (r, t)).start + hours, -eta_c)
        eq.add_many(rows, catalog.block("dis", (r, t)).start + hours,
                    1.0 / eta_d)
    a_eq = eq.build(eq_rows, n)

    # --- inequality system ---------------------------------------------
    le_blocks: list[RowBlock] = []
    le_rows = 0

    def add_le_block(kind, key, count):
        nonlocal le_rows
        le_blocks.append(RowBlock(kind, key, le_rows, count))
        le_rows += count

    for site in sorted(gen_sites + conv_sites):
        add_le_block("avl", site, H)
    for kind in ("chp", "dip", "sen"):
        for site in stor_sites:
            add_le_block(kind, site, H)
    for key in link_keys:
        for direction in ("F", "R"):
            add_le_block("fcp", (key, direction), H)
    for r, t in stor_sites:
        if techs[t].energy_to_power_ratio is not None:
            add_le_block("e2p", (r, t), 1)
    for r, t in gen_sites:
        if techs[t].energy_budget_mwh is not None:
            add_le_block("bgt", (r, t), 1)

    le = TripletBuilder()
    b_le = np.zeros(le_rows)
    le_start = {(blk.kind, blk.key): blk.start for blk in le_blocks}

    for r, t in gen_sites:
        rows = le_start[("avl", (r, t))] + hours
        dsp = catalog.block("dsp", (r, t))
        cap = catalog.block("cap", (r, t))
        le.add_many(rows, dsp.start + hours, 1.0)
        le.add_many(rows, cap.start, -scenario.profiles[(r, t)])
    for r, t in conv_sites:
        rows = le_start[("avl", (r, t))] + hours
        le.add_many(rows, catalog.block("dsp", (r, t)).start + hours, 1.0)
        le.add_many(rows, catalog.block("cap", (r, t)).start, -1.0)
    for r, t in stor_sites:
        cap = catalog.block("cap", (r, t))
        ecap = catalog.block("ecap", (r, t))
        rows = le_start[("chp", (r, t))] + hours
        le.add_many(rows, catalog.block("chg", (r, t)).start + hours, 1.0)
        le.add_many(rows, cap.start, -1.0)
        rows = le_start[("dip", (r, t))] + hours
        le.add_many(rows, catalog.block("dis", (r, t)).start + hours, 1.0)
        le.add_many(rows, cap.start, -1.0)
        rows = le_start[("sen", (r, t))] + hours
        le.add_many(rows, catalog.block("soc", (r, t)).start + hours, 1.0)
        le.add_many(rows, ecap.start, -1.0)
    for key in link_keys:
        lcap = catalog.block("lcap", key)
        for direction in ("F", "R"):
            rows = le_start[("fcp", (key, direction))] + hours
            flw = catalog.block("flw", (key, direction))
            le.add_many(rows, flw.start + hours, 1.0)
            le.add_many(rows, lcap.start, -1.0)
    for r, t in stor_sites:
        ratio = techs[t].energy_to_power_ratio
        if ratio is None:
            continue
        row = le_start[("e2p", (r, t))]
        le.add(row, catalog.block("ecap", (r, t)).start, 1.0)
        le.add(row, catalog.block("cap", (r, t)).start, -ratio)
    for r, t in gen_sites:
        budget = techs[t].energy_budget_mwh
        if budget is None:
            continue
        row = le_start[("bgt", (r, t))]
        dsp = catalog.block("dsp", (r, t))
        le.add_many(row, dsp.start + hours, 1.0)
        b_le[row] = budget * frac
    a_le = le.build(le_rows, n)

    return LinearProgram(
        c=c, a_eq=a_eq, b_eq=b_eq, a_le=a_le, b_le=b_le, lb=lb, ub=ub,
        catalog=catalog, eq_blocks=tuple(eq_blocks), le_blocks=tuple(le_blocks),
        start_at_upper=start_at_upper,
    )


def cost_split(lp: LinearProgram, x: np.ndarray) -> tuple[float, float]:
    """(C_System, C_LOL) in EUR; their sum is exactly c.x."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (lp.n_vars,):
        raise ValueError(f"x has shape {x.shape}, expected ({lp.n_vars},)")
    c_lol = 0.0
    for blk in lp.catalog.blocks_of("shd"):
        c_lol += float(lp.c[blk.start:blk.stop] @ x[blk.start:blk.stop])
    total = float(lp.c @ x)
    return total - c_lol, c_lol
