"""Fixed-layout MPS export of triangulation models."""

from __future__ import annotations

from pathlib import Path

from .model import IlpModel


def _num(v: float) -> str:
    v = float(v)
    return str(int(v)) if v.is_integer() and abs(v) < 1e15 else repr(v)


def mps_text(model: IlpModel, name: str = "TRIANGLE") -> str:
    """MPS text with 8-character names in the classic field columns.

    Coefficients are written at full precision, so a value may run past
    column 36; names never contain blanks, so free-format readers agree.
    """
    lines = [f"NAME          {name[:8]}"]
    for j, t in enumerate(model.triangles):
        lines.append(f"* {model.column_name(j)} triangle {t[0]} {t[1]} {t[2]}")
    for r, con in enumerate(model.constraints):
        lines.append(f"* {model.row_name(r)} {con.kind} edge {con.edge[0]} {con.edge[1]}")
    lines.append("ROWS")
    lines.append(" N  COST")
    for r in range(model.n_rows):
        lines.append(f" E  {model.row_name(r)}")
    entries: list[list[tuple[str, int]]] = [[] for _ in range(model.n_vars)]
    for r, con in enumerate(model.constraints):
        for j, a in zip(con.columns, con.coefs):
            entries[j].append((model.row_name(r), a))
    lines.append("COLUMNS")
    lines.append("    MARKER                 'MARKER'                 'INTORG'")
    for j in range(model.n_vars):
        col = model.column_name(j)
        lines.append(f"    {col:<8}  {'COST':<8}  {_num(model.costs[j])}")
        for row, a in entries[j]:
            lines.append(f"    {col:<8}  {row:<8}  {_num(a)}")
    lines.append("    MARKER                 'MARKER'                 'INTEND'")
    lines.append("RHS")
    for r, con in enumerate(model.constraints):
        if con.rhs != 0:
            lines.append(f"    {'RHS':<8}  {model.row_name(r):<8}  {_num(con.rhs)}")
    lines.append("BOUNDS")
    for j in range(model.n_vars):
        lines.append(f" BV {'BND':<8}  {model.column_name(j):<8}")
    lines.append("ENDATA")
    return "\n".join(lines) + "\n"


def export_mps(model: IlpModel, path, name: str = "TRIANGLE") -> None:
    Path(path).write_text(mps_text(model, name))
