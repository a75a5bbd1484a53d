"""MPS interchange: deterministic writer, a reader for the same dialect,
and the name/value solution CSV used to import external solver results.

Row and column names come straight from the variable catalog, so a
solution produced by any MPS-capable solver can be mapped back onto the
model by name.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._format import fmt12
from ._sparse import SparseMatrix, TripletBuilder
from .lp import LinearProgram, VariableCatalog

OBJECTIVE_NAME = "COST"
RHS_NAME = "RHS"
BOUND_NAME = "BND"


def export_mps(lp: LinearProgram, path: str | Path, name: str = "SHEDOPT") -> None:
    """Write the LP in MPS format (long names, one entry per line).

    Every column appears in COLUMNS at least once (a zero objective entry
    is emitted for otherwise-empty columns) so the file round-trips the
    full catalog.
    """
    path = Path(path)
    cols = lp.catalog.names if lp.catalog is not None \
        else [f"X{j}" for j in range(lp.n_vars)]
    eq_names = lp.eq_names()
    le_names = lp.le_names()

    by_col: list[list[tuple[str, float]]] = [[] for _ in range(lp.n_vars)]
    for j, value in enumerate(lp.c):
        if value != 0.0:
            by_col[j].append((OBJECTIVE_NAME, float(value)))
    for matrix, names in ((lp.a_eq, eq_names), (lp.a_le, le_names)):
        for r, col, v in zip(matrix.rows, matrix.cols, matrix.vals):
            by_col[col].append((names[r], float(v)))
    for j in range(lp.n_vars):
        if not by_col[j]:
            by_col[j].append((OBJECTIVE_NAME, 0.0))

    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        w = fh.write
        w(f"NAME          {name}\n")
        w("ROWS\n")
        w(f" N  {OBJECTIVE_NAME}\n")
        for row_name in eq_names:
            w(f" E  {row_name}\n")
        for row_name in le_names:
            w(f" L  {row_name}\n")
        w("COLUMNS\n")
        for j in range(lp.n_vars):
            for row_name, value in by_col[j]:
                w(f"    {cols[j]}  {row_name}  {_num(value)}\n")
        w("RHS\n")
        for row_name, value in zip(eq_names, lp.b_eq):
            if value != 0.0:
                w(f"    {RHS_NAME}  {row_name}  {_num(value)}\n")
        for row_name, value in zip(le_names, lp.b_le):
            if value != 0.0:
                w(f"    {RHS_NAME}  {row_name}  {_num(value)}\n")
        w("BOUNDS\n")
        for j in range(lp.n_vars):
            lo, hi = lp.lb[j], lp.ub[j]
            if lo == hi:
                w(f" FX {BOUND_NAME}  {cols[j]}  {_num(lo)}\n")
                continue
            if lo != 0.0:
                w(f" LO {BOUND_NAME}  {cols[j]}  {_num(lo)}\n")
            if np.isfinite(hi):
                w(f" UP {BOUND_NAME}  {cols[j]}  {_num(hi)}\n")
        w("ENDATA\n")


def _num(value: float) -> str:
    if value == 0:
        value = 0.0
    return f"{value:.17g}"


@dataclass
class MpsProblem:
    name: str
    col_names: list[str]
    row_names: list[str]
    senses: list[str]            # E | L | G per constraint row
    a: SparseMatrix
    rhs: np.ndarray
    c: np.ndarray
    lb: np.ndarray
    ub: np.ndarray

    def to_linear_program(self) -> LinearProgram:
        """Constraint rows regrouped as equalities plus <= rows (G negated)."""
        eq_idx = [i for i, s in enumerate(self.senses) if s == "E"]
        le_idx = [i for i, s in enumerate(self.senses) if s != "E"]
        flip = np.array([-1.0 if self.senses[i] == "G" else 1.0
                         for i in le_idx])
        eq = TripletBuilder()
        le = TripletBuilder()
        eq_pos = {row: k for k, row in enumerate(eq_idx)}
        le_pos = {row: k for k, row in enumerate(le_idx)}
        for r, col, v in zip(self.a.rows, self.a.cols, self.a.vals):
            if r in eq_pos:
                eq.add(eq_pos[r], col, v)
            else:
                k = le_pos[r]
                le.add(k, col, v * flip[k])
        n = len(self.col_names)
        return LinearProgram(
            c=self.c.copy(),
            a_eq=eq.build(len(eq_idx), n),
            b_eq=self.rhs[eq_idx].copy(),
            a_le=le.build(len(le_idx), n),
            b_le=self.rhs[le_idx] * flip if le_idx else np.zeros(0),
            lb=self.lb.copy(), ub=self.ub.copy(),
        )


def read_mps(path: str | Path) -> MpsProblem:
    """Parse the MPS dialect emitted by :func:`export_mps` (also accepts
    G rows and LO/UP/FX/MI/PL/BV-free files with whitespace-split fields)."""
    path = Path(path)
    name = ""
    section = None
    objective = None
    row_names: list[str] = []
    senses: list[str] = []
    row_pos: dict[str, int] = {}
    col_pos: dict[str, int] = {}
    col_names: list[str] = []
    entries: list[tuple[int, int, float]] = []
    obj_entries: dict[int, float] = {}
    rhs: dict[int, float] = {}
    bounds: list[tuple[str, str, float | None]] = []

    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("*"):
                continue
            is_header = not line[0].isspace()
            fields = line.split()
            if is_header:
                keyword = fields[0].upper()
                if keyword == "NAME":
                    name = fields[1] if len(fields) > 1 else ""
                    continue
                if keyword == "ENDATA":
                    break
                if keyword in ("ROWS", "COLUMNS", "RHS", "BOUNDS"):
                    section = keyword
                    continue
                if keyword == "RANGES":
                    raise ValueError(f"{path.name}:{lineno}: RANGES section "
                                     "is not supported")
                raise ValueError(f"{path.name}:{lineno}: unknown section "
                                 f"'{keyword}'")
            if section == "ROWS":
                sense, row_name = fields[0].upper(), fields[1]
                if sense == "N":
                    if objective is None:
                        objective = row_name
                    continue
                if sense not in ("E", "L", "G"):
                    raise ValueError(f"{path.name}:{lineno}: bad row sense "
                                     f"'{sense}'")
                row_pos[row_name] = len(row_names)
                row_names.append(row_name)
                senses.append(sense)
            elif section == "COLUMNS":
                col_name = fields[0]
                if col_name not in col_pos:
                    col_pos[col_name] = len(col_names)
                    col_names.append(col_name)
                j = col_pos[col_name]
                for row_name, text in _pairs(fields[1:], path, lineno):
                    value = float(text)
                    if row_name == objective:
                        obj_entries[j] = obj_entries.get(j, 0.0) + value
                    elif row_name in row_pos:
                        entries.append((row_pos[row_name], j, value))
                    else:
                        raise ValueError(f"{path.name}:{lineno}: unknown row "
                                         f"'{row_name}'")
            elif section == "RHS":
                for row_name, text in _pairs(fields[1:], path, lineno):
                    if row_name == objective:
                        continue
                    if row_name not in row_pos:
                        raise ValueError(f"{path.name}:{lineno}: unknown row "
                                         f"'{row_name}'")
                    rhs[row_pos[row_name]] = float(text)
            elif section == "BOUNDS":
                btype = fields[0].upper()
                col_name = fields[2]
                value = float(fields[3]) if len(fields) > 3 else None
                bounds.append((btype, col_name, value))
            else:
                raise ValueError(f"{path.name}:{lineno}: data before any "
                                 "section header")

    n = len(col_names)
    m = len(row_names)
    c = np.zeros(n)
    for j, value in obj_entries.items():
        c[j] = value
    rhs_vec = np.zeros(m)
    for i, value in rhs.items():
        rhs_vec[i] = value
    lb = np.zeros(n)
    ub = np.full(n, np.inf)
    for btype, col_name, value in bounds:
        if col_name not in col_pos:
            raise ValueError(f"{path.name}: bound for unknown column "
                             f"'{col_name}'")
        j = col_pos[col_name]
        if btype == "UP":
            ub[j] = value
        elif btype == "LO":
            lb[j] = value
        elif btype == "FX":
            lb[j] = ub[j] = value
        elif btype == "MI":
            lb[j] = -np.inf
        elif btype == "PL":
            ub[j] = np.inf
        else:
            raise ValueError(f"{path.name}: unsupported bound type '{btype}'")

    rows = np.array([e[0] for e in entries], dtype=np.int64)
    cols = np.array([e[1] for e in entries], dtype=np.int64)
    vals = np.array([e[2] for e in entries])
    return MpsProblem(
        name=name, col_names=col_names, row_names=row_names, senses=senses,
        a=SparseMatrix(m, n, rows, cols, vals), rhs=rhs_vec, c=c, lb=lb, ub=ub,
    )


def _pairs(fields: list[str], path: Path, lineno: int):
    if len(fields) % 2 != 0:
        raise ValueError(f"{path.name}:{lineno}: expected name/value pairs")
    for k in range(0, len(fields), 2):
        yield fields[k], fields[k + 1]


# --- solution interchange -------------------------------------------------

def write_solution_csv(path: str | Path, catalog: VariableCatalog,
                       x: np.ndarray) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["name", "value"])
        for name, value in zip(catalog.names, x):
            writer.writerow([name, fmt12(float(value))])


def read_solution_csv(path: str | Path, catalog: VariableCatalog) -> np.ndarray:
    """Map name,value rows onto the catalog; absent variables default to 0,
    unknown names are an error."""
    path = Path(path)
    index = catalog.name_to_index()
    x = np.zeros(catalog.n)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        got = set(reader.fieldnames or ())
        if got != {"name", "value"}:
            raise ValueError(f"{path.name}: expected columns name,value, "
                             f"got {sorted(got)}")
        for lineno, row in enumerate(reader, start=2):
            name = (row["name"] or "").strip()
            if name not in index:
                raise ValueError(f"{path.name}:{lineno}: unknown variable "
                                 f"'{name}'")
            try:
                x[index[name]] = float(row["value"])
            except (TypeError, ValueError):
                raise ValueError(f"{path.name}:{lineno}: malformed value "
                                 f"{row['value']!r}") from None
    return x
