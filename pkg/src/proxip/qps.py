"""QPS file reading and writing.

QPS is the MPS variant used to distribute quadratic programs: the linear
part follows MPS conventions and the Hessian arrives in a QUADOBJ section
(one triangle, symmetric counterpart implied) or a QMATRIX section (both
triangles given). Fixed- and free-form layouts are both accepted; section
headers start in column one, data lines are indented. Numeric literals are
parsed to the nearest double, Fortran ``D`` exponents included.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import QpProblem
from .sparse import SparseMatrixCsc

__all__ = ["QpsFile", "QpsParseError", "parse_qps", "to_problem", "emit_qps", "load_qps"]

_SECTIONS = ("NAME", "ROWS", "COLUMNS", "RHS", "RANGES", "BOUNDS", "QUADOBJ", "QMATRIX", "ENDATA")
_SECTION_ORDER = {name: i for i, name in enumerate(_SECTIONS)}
_BOUND_TYPES_VALUED = {"LO", "UP", "FX"}
_BOUND_TYPES_FLAG = {"FR", "MI", "PL"}
_BOUND_TYPES_INTEGER = {"BV", "LI", "UI"}


class QpsParseError(ValueError):
    """Parse failure; carries the 1-based source line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass
class QpsFile:
    """Structured contents of one QPS file, order-preserving."""

    name: str = ""
    rows: list[tuple[str, str]] = field(default_factory=list)  # (sense, row name)
    objective_row: str = ""
    column_order: list[str] = field(default_factory=list)
    columns: list[tuple[str, str, float]] = field(default_factory=list)
    rhs: dict[str, float] = field(default_factory=dict)
    ranges: dict[str, float] = field(default_factory=dict)
    bounds: list[tuple[str, str, float | None]] = field(default_factory=list)
    quad: list[tuple[str, str, float]] = field(default_factory=list)
    quad_section: str = ""  # "QUADOBJ", "QMATRIX", or "" when absent


def _parse_number(token: str, line_no: int) -> float:
    try:
        return float(token.replace("D", "e").replace("d", "e"))
    except ValueError:
        raise QpsParseError(line_no, f"expected a number, got {token!r}") from None


def parse_qps(text: str) -> QpsFile:
    """Parse QPS text into its structured form.

    Duplicate entries within a section are summed. Undeclared row or column
    references, missing objective, out-of-order or unknown sections, and
    missing ENDATA are reported with their line numbers.
    """
    out = QpsFile()
    section = None
    last_section = -1
    seen_endata = False
    row_sense: dict[str, str] = {}
    col_seen: set[str] = set()
    col_entry_at: dict[tuple[str, str], int] = {}
    quad_entry_at: dict[tuple[str, str], int] = {}
    last_line_no = 0

    for line_no, raw in enumerate(text.splitlines(), start=1):
        last_line_no = line_no
        if not raw.strip() or raw.lstrip().startswith("*"):
            continue
        if seen_endata:
            raise QpsParseError(line_no, "content after ENDATA")
        indented = raw[0] in " \t"
        tokens = raw.split()

        if not indented:  # section header
            header = tokens[0].upper()
            if header == "OBJSENSE":
                raise QpsParseError(line_no, "OBJSENSE is not supported")
            if header not in _SECTION_ORDER:
                raise QpsParseError(line_no, f"unknown section {tokens[0]!r}")
            if _SECTION_ORDER[header] <= last_section:
                raise QpsParseError(line_no, f"section {header} out of order")
            if header in ("QUADOBJ", "QMATRIX") and out.quad_section:
                raise QpsParseError(line_no, "duplicate quadratic section")
            last_section = _SECTION_ORDER[header]
            section = header
            if header == "NAME":
                out.name = tokens[1] if len(tokens) > 1 else ""
            elif header in ("QUADOBJ", "QMATRIX"):
                out.quad_section = header
            elif header == "ENDATA":
                seen_endata = True
            continue

        if section is None:
            raise QpsParseError(line_no, "data before any section header")

        if section == "ROWS":
            if len(tokens) != 2:
                raise QpsParseError(line_no, "ROWS lines need a sense and a name")
            sense = tokens[0].upper()
            if sense not in ("N", "E", "L", "G"):
                raise QpsParseError(line_no, f"unknown row sense {tokens[0]!r}")
            name = tokens[1]
            if name in row_sense:
                raise QpsParseError(line_no, f"duplicate row {name!r}")
            if sense == "N":
                if out.objective_row:
                    raise QpsParseError(line_no, "more than one objective row")
                out.objective_row = name
            row_sense[name] = sense
            out.rows.append((sense, name))

        elif section == "COLUMNS":
            if tokens[1].upper() == "'MARKER'" or (len(tokens) > 2 and tokens[2].upper() == "'MARKER'"):
                raise QpsParseError(line_no, "integer markers are not supported")
            if len(tokens) not in (3, 5):
                raise QpsParseError(line_no, "COLUMNS lines need 1 or 2 (row, value) pairs")
            col = tokens[0]
            if col not in col_seen:
                col_seen.add(col)
                out.column_order.append(col)
            for i in range(1, len(tokens), 2):
                row = tokens[i]
                if row not in row_sense:
                    raise QpsParseError(line_no, f"entry references undeclared row {row!r}")
                val = _parse_number(tokens[i + 1], line_no)
                key = (col, row)
                if key in col_entry_at:
                    idx = col_entry_at[key]
                    prev = out.columns[idx]
                    out.columns[idx] = (prev[0], prev[1], prev[2] + val)
                else:
                    col_entry_at[key] = len(out.columns)
                    out.columns.append((col, row, val))

        elif section in ("RHS", "RANGES"):
            if len(tokens) not in (3, 5):
                raise QpsParseError(line_no, f"{section} lines need 1 or 2 (row, value) pairs")
            target = out.rhs if section == "RHS" else out.ranges
            for i in range(1, len(tokens), 2):
                row = tokens[i]
                if row not in row_sense:
                    raise QpsParseError(line_no, f"{section} references undeclared row {row!r}")
                if section == "RANGES" and row == out.objective_row:
                    raise QpsParseError(line_no, "range on the objective row")
                val = _parse_number(tokens[i + 1], line_no)
                target[row] = target.get(row, 0.0) + val

        elif section == "BOUNDS":
            btype = tokens[0].upper()
            if btype in _BOUND_TYPES_INTEGER:
                raise QpsParseError(line_no, f"integer bound type {btype} is not supported")
            if btype in _BOUND_TYPES_VALUED:
                if len(tokens) != 4:
                    raise QpsParseError(line_no, f"{btype} bound needs set, column, value")
                col, val = tokens[2], _parse_number(tokens[3], line_no)
            elif btype in _BOUND_TYPES_FLAG:
                # a trailing value field is tolerated and ignored
                if len(tokens) not in (3, 4):
                    raise QpsParseError(line_no, f"{btype} bound needs set and column")
                col, val = tokens[2], None
            else:
                raise QpsParseError(line_no, f"unknown bound type {tokens[0]!r}")
            if col not in col_seen:
                raise QpsParseError(line_no, f"bound references undeclared column {col!r}")
            out.bounds.append((btype, col, val))

        elif section in ("QUADOBJ", "QMATRIX"):
            if len(tokens) != 3:
                raise QpsParseError(line_no, "quadratic entries need two columns and a value")
            c1, c2 = tokens[0], tokens[1]
            for c in (c1, c2):
                if c not in col_seen:
                    raise QpsParseError(line_no, f"quadratic entry references undeclared column {c!r}")
            val = _parse_number(tokens[2], line_no)
            key = (c1, c2)
            if key in quad_entry_at:
                idx = quad_entry_at[key]
                prev = out.quad[idx]
                out.quad[idx] = (prev[0], prev[1], prev[2] + val)
            else:
                quad_entry_at[key] = len(out.quad)
                out.quad.append((c1, c2, val))

        elif section in ("NAME", "ENDATA"):
            raise QpsParseError(line_no, f"unexpected data in section {section}")

    if not seen_endata:
        raise QpsParseError(last_line_no + 1, "missing ENDATA")
    if not out.objective_row:
        raise QpsParseError(last_line_no, "no objective row declared")
    return out


def to_problem(qps: QpsFile) -> QpProblem:
    """Instantiate the QP described by a parsed file.

    Objective is 0.5 x'Px + c'x (+ constant, the negated objective-row RHS).
    Equality rows feed (A, b); inequality rows feed (G, h) with >= rows
    negated; ranged rows contribute an upper and a lower inequality pair.
    Variables default to [0, +inf) bounds; FX bounds become equality rows.
    """
    col_index = {name: i for i, name in enumerate(qps.column_order)}
    n = len(qps.column_order)

    c = np.zeros(n)
    obj_constant = -qps.rhs.get(qps.objective_row, 0.0)

    a_rows: list[tuple[dict[int, float], float]] = []  # (coefficients, rhs)
    g_rows: list[tuple[dict[int, float], float]] = []

    coeffs: dict[str, dict[int, float]] = {name: {} for _, name in qps.rows}
    for col, row, val in qps.columns:
        j = col_index[col]
        if row == qps.objective_row:
            c[j] += val
        else:
            coeffs[row][j] = coeffs[row].get(j, 0.0) + val

    for sense, name in qps.rows:
        if sense == "N":
            continue
        entries = coeffs[name]
        rhs = qps.rhs.get(name, 0.0)
        rng = qps.ranges.get(name)
        if rng is not None and rng != 0.0:
            if sense == "L":
                lo, hi = rhs - abs(rng), rhs
            elif sense == "G":
                lo, hi = rhs, rhs + abs(rng)
            else:  # E
                lo, hi = (rhs, rhs + rng) if rng > 0 else (rhs + rng, rhs)
            g_rows.append((entries, hi))
            g_rows.append(({j: -v for j, v in entries.items()}, -lo))
        elif sense == "E":
            a_rows.append((entries, rhs))
        elif sense == "L":
            g_rows.append((entries, rhs))
        else:  # G
            g_rows.append(({j: -v for j, v in entries.items()}, -rhs))

    lower = np.zeros(n)
    upper = np.full(n, np.inf)
    explicit_lower = np.zeros(n, dtype=bool)
    fixed: list[tuple[int, float]] = []
    for btype, col, val in qps.bounds:
        j = col_index[col]
        if btype == "LO":
            lower[j] = val
            explicit_lower[j] = True
        elif btype == "UP":
            upper[j] = val
            # classic MPS convention: a negative upper bound on a variable
            # whose lower bound is still the default zero frees it below
            if val < 0.0 and not explicit_lower[j]:
                lower[j] = -np.inf
        elif btype == "FX":
            fixed.append((j, val))
            lower[j] = -np.inf
            upper[j] = np.inf
            explicit_lower[j] = True
        elif btype == "FR":
            lower[j] = -np.inf
            upper[j] = np.inf
            explicit_lower[j] = True
        elif btype == "MI":
            lower[j] = -np.inf
            explicit_lower[j] = True
        elif btype == "PL":
            upper[j] = np.inf
    for j, val in fixed:
        a_rows.append(({j: 1.0}, val))

    bad = np.flatnonzero(
        np.isfinite(lower) & np.isfinite(upper) & (lower > upper)
    )
    if bad.size:
        name = qps.column_order[bad[0]]
        raise QpsParseError(0, f"inconsistent bounds on column {name!r} (lower > upper)")

    def build(rows: list[tuple[dict[int, float], float]]) -> tuple[SparseMatrixCsc, np.ndarray]:
        ri, ci, vi, rhs = [], [], [], []
        for k, (entries, r) in enumerate(rows):
            for j, v in entries.items():
                ri.append(k)
                ci.append(j)
                vi.append(v)
            rhs.append(r)
        return (
            SparseMatrixCsc.from_triplets(len(rows), n, ri, ci, vi),
            np.asarray(rhs, dtype=np.float64),
        )

    A, b = build(a_rows)
    G, h = build(g_rows)

    qi, qj, qv = [], [], []
    if qps.quad_section == "QMATRIX":
        acc: dict[tuple[int, int], float] = {}
        for c1, c2, val in qps.quad:
            i, j = col_index[c1], col_index[c2]
            acc[(i, j)] = acc.get((i, j), 0.0) + val
        sym: dict[tuple[int, int], float] = {}
        for (i, j), val in acc.items():
            lo, hi = min(i, j), max(i, j)
            sym[(lo, hi)] = sym.get((lo, hi), 0.0) + val / (1.0 if i == j else 2.0)
        for (i, j), val in sym.items():
            qi.append(i)
            qj.append(j)
            qv.append(val)
    else:
        for c1, c2, val in qps.quad:
            i, j = col_index[c1], col_index[c2]
            qi.append(min(i, j))
            qj.append(max(i, j))
            qv.append(val)
    P = SparseMatrixCsc.from_triplets(n, n, qi, qj, qv)

    return QpProblem(
        P=P,
        c=c,
        A=A,
        b=b,
        G=G,
        h=h,
        l=lower,
        u=upper,
        obj_constant=obj_constant,
        name=qps.name,
    )


def _fmt(value: float) -> str:
    if value == math.inf or value == -math.inf:
        raise ValueError("cannot emit infinite value")
    return repr(float(value))


def emit_qps(qps: QpsFile) -> str:
    """Render the structured form back to QPS text.

    Numbers are written with full round-trip precision, so parsing the output
    reproduces the input structure exactly.
    """
    lines = [f"NAME          {qps.name}".rstrip()]
    lines.append("ROWS")
    for sense, name in qps.rows:
        lines.append(f" {sense}  {name}")
    lines.append("COLUMNS")
    for col, row, val in qps.columns:
        lines.append(f"    {col}  {row}  {_fmt(val)}")
    lines.append("RHS")
    for row, val in qps.rhs.items():
        lines.append(f"    RHS  {row}  {_fmt(val)}")
    if qps.ranges:
        lines.append("RANGES")
        for row, val in qps.ranges.items():
            lines.append(f"    RNG  {row}  {_fmt(val)}")
    if qps.bounds:
        lines.append("BOUNDS")
        for btype, col, val in qps.bounds:
            if val is None:
                lines.append(f" {btype} BND  {col}")
            else:
                lines.append(f" {btype} BND  {col}  {_fmt(val)}")
    if qps.quad_section:
        lines.append(qps.quad_section)
        for c1, c2, val in qps.quad:
            lines.append(f"    {c1}  {c2}  {_fmt(val)}")
    lines.append("ENDATA")
    return "\n".join(lines) + "\n"


def load_qps(path) -> QpProblem:
    """Parse a QPS file from disk into a problem."""
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        text = fh.read()
    qps = parse_qps(text)
    problem = to_problem(qps)
    if not problem.name:
        problem.name = str(path)
    return problem
