"""Minimal MPS reader for linear programs.

Supported sections: NAME, ROWS (N/E/L/G), COLUMNS, RHS, BOUNDS
(LO/UP/FX/FR/MI/PL) and ENDATA.  Both free (whitespace separated) and
fixed-column layouts are accepted: a file is read as free format first and
re-read by fixed columns when that fails, which covers fixed files whose
names contain blanks.

The LP is brought to ``min c.x  s.t.  A x = b,  x >= 0``:

* ``L`` and ``G`` rows gain a slack column (``+s`` and ``-s``),
* a finite lower bound shifts the variable, ``x = l + x'``,
* a finite upper bound adds a row ``x' + w = u - l`` with slack ``w``,
* ``FX`` variables are substituted out,
* free variables are split, ``x = x+ - x-``; a variable with only an upper
  bound is reflected, ``x = u - x'``.

Constants produced by the substitutions, together with the negated RHS
entry of the objective row, are collected in
``metadata["objective_constant"]``; the original objective equals
``c.x + objective_constant``.  :func:`recover_mps_solution` maps a
standard-form point back to the named MPS variables.
"""

from __future__ import annotations

import math

import numpy as np

from ..cones import ConeDesc, Orthant
from ..errors import ParseError, UnsupportedFeature
from ..linalg import LinearMap
from .problem import Problem

# bound magnitudes at or above this are read as infinite
INFINITE_BOUND = 1e30

_FIXED_FIELDS = ((1, 3), (4, 12), (14, 22), (24, 36), (39, 47), (49, 61))


class _Reader:
    def __init__(self, text: str, fixed: bool):
        self.text = text
        self.fixed = fixed
        self.name = ""
        self.obj_row = None
        self.row_type = {}
        self.row_order = []
        self.cols = {}
        self.col_order = []
        self.rhs = {}
        self.obj_rhs = 0.0
        self.lower = {}
        self.upper = {}

    def fail(self, msg, ln, col=1):
        raise ParseError(msg, ln, col)

    def number(self, tok, ln):
        try:
            v = float(tok)
        except ValueError:
            self.fail(f"expected a number, found {tok!r}", ln)
        if math.isnan(v):
            self.fail(f"invalid number {tok!r}", ln)
        return v

    def fields(self, line: str) -> list:
        if self.fixed:
            head = line[1:3].strip()
            rest = [line[a:b].strip() for a, b in _FIXED_FIELDS[1:]]
            while rest and not rest[-1]:
                rest.pop()
            return ([head] if head else []) + rest
        return line.split()

    def run(self):
        section = None
        seen_end = False
        for ln, raw in enumerate(self.text.splitlines(), start=1):
            line = raw.rstrip("\n\r")
            if not line.strip() or line.lstrip().startswith("*"):
                continue
            if not line[0].isspace():
                words = line.split()
                key = words[0].upper()
                if key == "NAME":
                    self.name = line[4:].strip() if self.fixed else " ".join(words[1:])
                    section = "NAME"
                    continue
                if key == "RANGES":
                    raise UnsupportedFeature("RANGES")
                if key == "OBJSENSE":
                    if len(words) > 1:
                        self._objsense(words[1], ln)
                    section = "OBJSENSE"
                    continue
                if key in ("ROWS", "COLUMNS", "RHS", "BOUNDS"):
                    section = key
                    continue
                if key == "ENDATA":
                    seen_end = True
                    break
                self.fail(f"unknown section {words[0]!r}", ln)
            if section is None or section == "NAME":
                self.fail("data line outside of a section", ln, 2)
            if section == "OBJSENSE":
                self._objsense(line.strip(), ln)
                continue
            f = self.fields(line)
            getattr(self, "_" + section.lower())(f, ln)
        if not seen_end:
            self.fail("missing ENDATA", len(self.text.splitlines()) + 1)
        if self.obj_row is None:
            self.fail("no objective (N) row", 1)

    def _objsense(self, word, ln):
        w = word.upper()
        if w in ("MAX", "MAXIMIZE"):
            raise UnsupportedFeature("OBJSENSE MAX")
        if w not in ("MIN", "MINIMIZE"):
            self.fail(f"unknown objective sense {word!r}", ln)

    def _rows(self, f, ln):
        if len(f) != 2:
            self.fail(f"ROWS entry needs a type and a name, found {len(f)} fields", ln)
        typ, name = f[0].upper(), f[1]
        if typ not in ("N", "E", "L", "G"):
            self.fail(f"unknown row type {f[0]!r}", ln, 2)
        if name in self.row_type or name == self.obj_row:
            self.fail(f"duplicate row {name!r}", ln)
        if typ == "N":
            if self.obj_row is None:
                self.obj_row = name
            else:
                self.row_type[name] = "N"
            return
        self.row_type[name] = typ
        self.row_order.append(name)

    def _columns(self, f, ln):
        if "'MARKER'" in f or "MARKER" in f:
            return
        if len(f) not in (3, 5):
            self.fail(f"COLUMNS entry needs 3 or 5 fields, found {len(f)}", ln)
        col = f[0]
        if col not in self.cols:
            self.cols[col] = {}
            self.col_order.append(col)
        for row, val in zip(f[1::2], f[2::2]):
            v = self.number(val, ln)
            if row == self.obj_row or row in self.row_type:
                entries = self.cols[col]
                entries[row] = entries.get(row, 0.0) + v
            else:
                self.fail(f"unknown row {row!r} in COLUMNS", ln)

    def _rhs(self, f, ln):
        if len(f) in (3, 5):
            f = f[1:]
        elif len(f) not in (2, 4):
            self.fail(f"RHS entry needs 2 to 5 fields, found {len(f)}", ln)
        for row, val in zip(f[0::2], f[1::2]):
            v = self.number(val, ln)
            if row == self.obj_row:
                self.obj_rhs = v
            elif row in self.row_type:
                self.rhs[row] = v
            else:
                self.fail(f"unknown row {row!r} in RHS", ln)

    def _bounds(self, f, ln):
        if not f:
            self.fail("empty BOUNDS entry", ln)
        typ = f[0].upper()
        if typ in ("BV", "LI", "UI", "SC"):
            raise UnsupportedFeature(f"integer bound type {typ}")
        if typ in ("LO", "UP", "FX"):
            if len(f) == 4:
                col, val = f[2], f[3]
            elif len(f) == 3:
                col, val = f[1], f[2]
            else:
                self.fail(f"{typ} bound needs a column and a value", ln)
            v = self.number(val, ln)
            if abs(v) >= INFINITE_BOUND:
                v = math.copysign(math.inf, v)
        elif typ in ("FR", "MI", "PL"):
            if len(f) == 3:
                col = f[2]
            elif len(f) == 2:
                col = f[1]
            else:
                self.fail(f"{typ} bound takes a column name only", ln)
        else:
            self.fail(f"unknown bound type {f[0]!r}", ln, 2)
        if col not in self.cols:
            self.fail(f"bound on unknown column {col!r}", ln)
        if typ == "LO":
            self.lower[col] = v
        elif typ == "UP":
            self.upper[col] = v
            # common convention: a negative upper bound without a lower one
            # makes the variable unbounded below
            if v < 0 and col not in self.lower:
                self.lower[col] = -math.inf
        elif typ == "FX":
            self.lower[col] = self.upper[col] = v
        elif typ == "FR":
            self.lower[col], self.upper[col] = -math.inf, math.inf
        elif typ == "MI":
            self.lower[col] = -math.inf
        else:
            self.upper[col] = math.inf


def _read(text: str) -> _Reader:
    try:
        rd = _Reader(text, fixed=False)
        rd.run()
        return rd
    except ParseError as first:
        rd = _Reader(text, fixed=True)
        try:
            rd.run()
        except ParseError:
            raise first from None
        return rd


def parse_mps_lp(text: str) -> Problem:
    rd = _read(text)
    row_index = {r: i for i, r in enumerate(rd.row_order)}
    m0 = len(rd.row_order)
    b = [rd.rhs.get(r, 0.0) for r in rd.row_order]
    trip_r, trip_c, trip_v = [], [], []
    cost = []
    const = -rd.obj_rhs
    var_map = []
    ncols = 0

    def new_col():
        nonlocal ncols
        cost.append(0.0)
        ncols += 1
        return ncols - 1

    def put(col_idx, entries, sign):
        for row, v in entries.items():
            if row == rd.obj_row:
                cost[col_idx] += sign * v
            elif rd.row_type[row] != "N":
                trip_r.append(row_index[row])
                trip_c.append(col_idx)
                trip_v.append(sign * v)

    def shift_rhs(entries, amount):
        nonlocal const
        for row, v in entries.items():
            if row == rd.obj_row:
                const += v * amount
            elif rd.row_type[row] != "N":
                b[row_index[row]] -= v * amount

    for name in rd.col_order:
        entries = rd.cols[name]
        lo = rd.lower.get(name, 0.0)
        up = rd.upper.get(name, math.inf)
        if lo > up:
            raise ParseError(f"column {name!r} has lower bound {lo} above upper bound {up}", 1, 1)
        if lo == up:
            shift_rhs(entries, lo)
            var_map.append((name, "fixed", (), lo))
        elif math.isfinite(lo):
            j = new_col()
            put(j, entries, 1.0)
            shift_rhs(entries, lo)
            var_map.append((name, "shift", (j,), lo))
            if math.isfinite(up):
                w = new_col()
                r = len(b)
                b.append(up - lo)
                trip_r += [r, r]
                trip_c += [j, w]
                trip_v += [1.0, 1.0]
        elif math.isfinite(up):
            j = new_col()
            put(j, entries, -1.0)
            shift_rhs(entries, up)
            var_map.append((name, "reflect", (j,), up))
        else:
            jp, jm = new_col(), new_col()
            put(jp, entries, 1.0)
            put(jm, entries, -1.0)
            var_map.append((name, "split", (jp, jm), 0.0))

    for name in rd.row_order:
        typ = rd.row_type[name]
        if typ in ("L", "G"):
            s = new_col()
            trip_r.append(row_index[name])
            trip_c.append(s)
            trip_v.append(1.0 if typ == "L" else -1.0)

    m = len(b)
    if m == 0:
        raise ParseError("the LP has no constraint rows", 1, 1)
    if ncols == 0:
        raise ParseError("the LP has no free columns after fixing variables", 1, 1)
    cone = ConeDesc([Orthant(ncols)])
    A = LinearMap(m, trip_r, trip_c, trip_v, cone)
    meta = {
        "objective_constant": const,
        "mps_rows": list(rd.row_order),
        "mps_columns": var_map,
        "mps_bound_rows": m - m0,
    }
    return Problem(A, np.array(b), np.array(cost), cone, name=rd.name, metadata=meta)


def recover_mps_solution(problem: Problem, x) -> dict:
    """Values of the original MPS columns for a standard-form point ``x``."""
    x = np.asarray(x, dtype=float)
    out = {}
    for name, kind, idx, off in problem.metadata["mps_columns"]:
        if kind == "fixed":
            out[name] = off
        elif kind == "shift":
            out[name] = off + x[idx[0]]
        elif kind == "reflect":
            out[name] = off - x[idx[0]]
        else:
            out[name] = x[idx[0]] - x[idx[1]]
    return out


def read_mps(path) -> Problem:
    with open(path, encoding="utf-8") as fh:
        return parse_mps_lp(fh.read())
