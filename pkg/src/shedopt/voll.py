"""Value of Lost Load: GVA-based derivation, 2050 projection, sectoral
disaggregation, and the optimal reliability standard CONE/VoLL.

All VoLL figures are EUR per kWh; the LP converts to EUR/MWh internally.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional

from ._format import fmt12

# Average sectoral VoLL in EUR/kWh (Netherlands, Ireland, Germany, Spain mix);
# their plain mean of 12.28 EUR/kWh is rescaled per country.
SECTOR_VOLL_BASIS_2020: dict[str, float] = {
    "agriculture": 22.1,
    "services": 4.1,
    "households": 19.9,
    "industry": 4.3,
    "transport": 11.0,
}


@dataclass(frozen=True)
class VollRecord:
    """Per-country economic inputs for VoLL projection."""

    country: str
    gdp_2020: float                    # EUR/a
    gdp_2050: float                    # EUR/a
    e_el_2020: float                   # MWh/a
    e_el_2050: float                   # MWh/a
    voll_2020: Optional[float] = None  # EUR/kWh
    gva: Optional[float] = None        # EUR/a


@dataclass(frozen=True)
class AdequacyConfig:
    cone: float   # EUR per kW per year
    voll: float   # EUR per kWh

    def __post_init__(self):
        if self.cone < 0:
            raise ValueError(f"CONE must be >= 0, got {self.cone}")
        if self.voll <= 0:
            raise ValueError(f"VoLL must be > 0, got {self.voll}")


def voll_from_gva(gva: float, e_el: float) -> float:
    """VoLL in EUR/kWh from gross value added (EUR/a) and electricity
    demand (MWh/a): the value of one undelivered kWh is the economic
    output it supports."""
    if gva <= 0:
        raise ValueError(f"GVA must be > 0, got {gva}")
    if e_el <= 0:
        raise ValueError(f"electricity demand must be > 0, got {e_el}")
    return gva / (e_el * 1000.0)


def project_voll(record: VollRecord) -> float:
    """Project a 2020 VoLL to 2050 by the GDP-growth over demand-growth
    ratio.  Falls back to the GVA-based value when voll_2020 is absent."""
    base = record.voll_2020
    if base is None:
        if record.gva is None:
            raise ValueError(f"{record.country}: need voll_2020 or gva")
        base = voll_from_gva(record.gva, record.e_el_2020)
    for name in ("gdp_2020", "gdp_2050", "e_el_2020", "e_el_2050"):
        value = getattr(record, name)
        if value is None or value <= 0:
            raise ValueError(f"{record.country}: {name} must be > 0, got {value}")
    gdp_ratio = record.gdp_2050 / record.gdp_2020
    demand_ratio = record.e_el_2050 / record.e_el_2020
    return base * gdp_ratio / demand_ratio


def sectoral_volls(country_voll: float,
                   demand_weights: Mapping[str, float],
                   basis: Mapping[str, float] | None = None) -> dict[str, float]:
    """Distribute a country VoLL over sectors.

    The sectoral basis is scaled by a single factor so the demand-weighted
    mean over the given weights equals ``country_voll``; ratios between
    sectors are preserved.
    """
    if basis is None:
        basis = SECTOR_VOLL_BASIS_2020
    total = sum(demand_weights.values())
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"demand weights must sum to 1, got {total!r}")
    if any(w < 0 for w in demand_weights.values()):
        raise ValueError("demand weights must be >= 0")
    if any(v <= 0 for v in basis.values()):
        raise ValueError("basis VoLLs must be > 0")
    weighted_mean = sum(demand_weights.get(s, 0.0) * basis[s] for s in basis)
    if weighted_mean <= 0:
        raise ValueError("weighted basis mean is zero; weights must cover "
                         "at least one sector")
    scale = country_voll / weighted_mean
    return {s: scale * basis[s] for s in basis}


def lole_opt(config: AdequacyConfig) -> float:
    """Optimal loss of load expectation in hours per year.

    EUR/(kW a) divided by EUR/kWh is kWh/(kW a) = h/a: the number of peak
    hours at which one extra kW of backup exactly pays for itself.
    """
    if config.voll <= 0:
        raise ValueError(f"VoLL must be > 0, got {config.voll}")
    return config.cone / config.voll


# --- voll_inputs.csv / voll_2050.csv interchange -------------------------

_INPUT_COLUMNS = ("country", "voll_2020_eur_per_kwh", "gva_eur",
                  "gdp_2020_eur", "gdp_2050_eur", "e_el_2020_mwh",
                  "e_el_2050_mwh")


def read_voll_inputs(path: str | Path) -> list[VollRecord]:
    path = Path(path)
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        got = set(reader.fieldnames or ())
        expected = set(_INPUT_COLUMNS)
        if got != expected:
            extra = sorted(got - expected)
            missing = sorted(expected - got)
            raise ValueError(f"{path.name}: unexpected columns "
                             f"(extra={extra}, missing={missing})")
        for lineno, row in enumerate(reader, start=2):
            def num(col, optional=False):
                text = (row[col] or "").strip()
                if text == "":
                    if optional:
                        return None
                    raise ValueError(f"{path.name}:{lineno}: column '{col}' "
                                     "is empty")
                try:
                    value = float(text)
                except ValueError:
                    raise ValueError(f"{path.name}:{lineno}: column '{col}': "
                                     f"malformed number '{text}'") from None
                if not math.isfinite(value):
                    raise ValueError(f"{path.name}:{lineno}: column '{col}': "
                                     f"non-finite number '{text}'")
                return value

            country = (row["country"] or "").strip()
            if not country:
                raise ValueError(f"{path.name}:{lineno}: empty country")
            records.append(VollRecord(
                country=country,
                voll_2020=num("voll_2020_eur_per_kwh", optional=True),
                gva=num("gva_eur", optional=True),
                gdp_2020=num("gdp_2020_eur"),
                gdp_2050=num("gdp_2050_eur"),
                e_el_2020=num("e_el_2020_mwh"),
                e_el_2050=num("e_el_2050_mwh"),
            ))
    return records


def project_table(records: list[VollRecord]) -> list[tuple[str, float]]:
    """(country, VoLL 2050) rows in input order."""
    return [(r.country, project_voll(r)) for r in records]


def write_voll_2050(path: str | Path, rows: list[tuple[str, float]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["country", "voll_2050_eur_per_kwh"])
        for country, value in rows:
            writer.writerow([country, fmt12(value)])
