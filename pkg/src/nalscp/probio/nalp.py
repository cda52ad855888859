"""Reader and writer for the line-oriented NALP text format.

Example::

    NALP 1
    # name: tiny
    CONES 1
    NN 2
    DIMS 1 2
    A 2
    0 0 1.0
    0 1 1.0
    B 1
    1.0
    C 2
    1.0 0.0
    END

``#`` starts a comment that runs to the end of the line.  A leading
``# name: <text>`` comment sets :attr:`Problem.name`.  Floats are written
with ``repr`` so that parsing the output gives back bit-identical data.
"""

from __future__ import annotations

import math
import re

import numpy as np

from ..cones import ConeDesc, Orthant, Psd, SecondOrder
from ..errors import ParseError
from ..linalg import LinearMap
from .problem import Problem

_NAME_RE = re.compile(r"^\s*#\s*name:\s*(.*?)\s*$")


class _Tokens:
    """Whitespace tokens tagged with their (line, column), comments removed."""

    def __init__(self, text: str):
        self.toks = []
        self.name = ""
        for ln, line in enumerate(text.splitlines(), start=1):
            m = _NAME_RE.match(line)
            if m and not self.name:
                self.name = m.group(1)
            body = line.split("#", 1)[0]
            for mt in re.finditer(r"\S+", body):
                self.toks.append((mt.group(0), ln, mt.start() + 1))
        self.pos = 0
        last = text.splitlines() or [""]
        self.eof = (len(last), len(last[-1]) + 1)

    def _where(self):
        if self.pos < len(self.toks):
            return self.toks[self.pos][1:]
        return self.eof

    def fail(self, msg: str, at=None):
        line, col = at if at is not None else self._where()
        raise ParseError(msg, line, col)

    def next(self, what: str):
        if self.pos >= len(self.toks):
            self.fail(f"expected {what}, found end of file")
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def keyword(self, word: str):
        tok, ln, col = self.next(f"'{word}'")
        if tok != word:
            self.fail(f"expected '{word}', found {tok!r}", (ln, col))

    def integer(self, what: str, lo: int = 0) -> int:
        tok, ln, col = self.next(what)
        try:
            v = int(tok)
        except ValueError:
            self.fail(f"expected integer {what}, found {tok!r}", (ln, col))
        if v < lo:
            self.fail(f"{what} must be >= {lo}, found {v}", (ln, col))
        return v

    def real(self, what: str) -> float:
        tok, ln, col = self.next(what)
        try:
            v = float(tok)
        except ValueError:
            self.fail(f"expected number {what}, found {tok!r}", (ln, col))
        if not math.isfinite(v):
            self.fail(f"{what} must be finite, found {tok!r}", (ln, col))
        return v


def parse_nalp(text: str) -> Problem:
    tk = _Tokens(text)
    tk.keyword("NALP")
    tok, ln, col = tk.next("format version")
    if tok != "1":
        tk.fail(f"unsupported format version {tok!r}", (ln, col))

    tk.keyword("CONES")
    k = tk.integer("cone count", lo=1)
    blocks = []
    for _ in range(k):
        kind, ln, col = tk.next("cone type NN, SOC or PSD")
        if kind not in ("NN", "SOC", "PSD"):
            tk.fail(f"expected cone type NN, SOC or PSD, found {kind!r}", (ln, col))
        size = tk.integer(f"{kind} size", lo=1)
        if kind == "NN":
            blocks.append(Orthant(size))
        elif kind == "SOC":
            if size < 2:
                tk.fail(f"SOC n ≥ 2 required, found {size}", (ln, col))
            blocks.append(SecondOrder(size))
        else:
            blocks.append(Psd(size))
    cone = ConeDesc(blocks)

    tk.keyword("DIMS")
    dims_at = tk._where()
    m = tk.integer("row count m", lo=1)
    nvec = tk.integer("vector length nvec", lo=1)
    if nvec != cone.vec_len:
        tk.fail(f"DIMS nvec = {nvec} but the cones have total length {cone.vec_len}", dims_at)

    tk.keyword("A")
    nnz = tk.integer("nonzero count")
    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz)
    for i in range(nnz):
        at = tk._where()
        r = tk.integer("row index")
        c = tk.integer("column index")
        if r >= m:
            tk.fail(f"row index {r} out of range [0, {m})", at)
        if c >= nvec:
            tk.fail(f"column index {c} out of range [0, {nvec})", at)
        rows[i], cols[i] = r, c
        vals[i] = tk.real("matrix value")

    tk.keyword("B")
    at = tk._where()
    if tk.integer("length of b") != m:
        tk.fail(f"B length must equal m = {m}", at)
    b = np.array([tk.real("entry of b") for _ in range(m)])

    tk.keyword("C")
    at = tk._where()
    if tk.integer("length of c") != nvec:
        tk.fail(f"C length must equal nvec = {nvec}", at)
    c = np.array([tk.real("entry of c") for _ in range(nvec)])

    tk.keyword("END")
    if tk.pos < len(tk.toks):
        tk.fail(f"unexpected token {tk.toks[tk.pos][0]!r} after END")

    A = LinearMap(m, rows, cols, vals, cone)
    return Problem(A, b, c, cone, name=tk.name)


def _block_line(blk) -> str:
    if isinstance(blk, Orthant):
        return f"NN {blk.n}"
    if isinstance(blk, SecondOrder):
        return f"SOC {blk.n}"
    return f"PSD {blk.p}"


def _floats(v, per_line: int = 8) -> list:
    out = []
    for i in range(0, len(v), per_line):
        out.append(" ".join(repr(float(a)) for a in v[i : i + per_line]))
    return out


def write_nalp(problem: Problem) -> str:
    lines = ["NALP 1"]
    if problem.name:
        lines.append(f"# name: {problem.name}")
    cone = problem.cone
    lines.append(f"CONES {len(cone.blocks)}")
    lines += [_block_line(b) for b in cone.blocks]
    lines.append(f"DIMS {problem.m} {cone.vec_len}")
    r, c, v = problem.A.triplets()
    lines.append(f"A {len(v)}")
    lines += [f"{int(i)} {int(j)} {float(a)!r}" for i, j, a in zip(r, c, v)]
    lines.append(f"B {problem.m}")
    lines += _floats(problem.b)
    lines.append(f"C {cone.vec_len}")
    lines += _floats(problem.c)
    lines.append("END")
    return "\n".join(lines) + "\n"


def read_nalp(path) -> Problem:
    with open(path, encoding="utf-8") as fh:
        return parse_nalp(fh.read())


def save_nalp(problem: Problem, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(write_nalp(problem))
