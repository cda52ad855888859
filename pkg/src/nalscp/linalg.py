"""Constraint operator, Schur complement assembly and conditioning."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .cones import ConeDesc, Spectral, weight_apply
from .errors import DimensionMismatch, NonPositiveEigenvalue, RankDeficient

# Relative diagonal shifts tried, in order, when Cholesky breaks down.
SHIFT_LADDER = (0.0, 1e-14, 1e-12, 1e-10, 1e-8)

MAX_DENSE_M = 2000


class LinearMap:
    """Sparse constraint operator ``A`` with its adjoint in the algebra.

    The stored matrix ``T`` (``m x vec_len``) acts on coordinates, so
    ``A x = T x``.  The adjoint is taken with respect to the trace inner
    product of ``cone``: ``A* lam = T' lam / gram``, which reduces to the
    plain transpose when the cone has no second-order blocks.

    Duplicate ``(row, col)`` triplets are summed.
    """

    def __init__(self, m, rows, cols, vals, cone: ConeDesc):
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        vals = np.asarray(vals, dtype=float).ravel()
        if not (len(rows) == len(cols) == len(vals)):
            raise DimensionMismatch("triplet arrays differ in length")
        n = cone.vec_len
        if len(rows) and (rows.min() < 0 or rows.max() >= m):
            raise DimensionMismatch(f"row index out of range [0, {m})")
        if len(cols) and (cols.min() < 0 or cols.max() >= n):
            raise DimensionMismatch(f"column index out of range [0, {n})")
        if not np.all(np.isfinite(vals)):
            raise ValueError("non-finite entry in A")
        T = sp.coo_matrix((vals, (rows, cols)), shape=(m, n)).tocsr()
        T.sum_duplicates()
        T.sort_indices()
        self.m = int(m)
        self.cone = cone
        self.T = T
        self._ginv = 1.0 / cone.gram

    @classmethod
    def from_dense(cls, T, cone: ConeDesc) -> "LinearMap":
        T = np.asarray(T, dtype=float)
        r, c = np.nonzero(T)
        return cls(T.shape[0], r, c, T[r, c], cone)

    @property
    def n(self) -> int:
        return self.cone.vec_len

    @property
    def shape(self):
        return (self.m, self.n)

    def triplets(self):
        """Canonical (row-major, summed) triplets."""
        coo = self.T.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return coo.row[order], coo.col[order], coo.data[order]

    def apply_primal(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[0] != self.n:
            raise DimensionMismatch(f"x has length {x.shape[0]}, expected {self.n}")
        return self.T @ x

    def apply_adjoint(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=float)
        if lam.shape[0] != self.m:
            raise DimensionMismatch(f"lambda has length {lam.shape[0]}, expected {self.m}")
        return (self.T.T @ lam) * self._ginv

    @cached_property
    def adjoint_dense(self) -> np.ndarray:
        """``A*`` as a dense ``vec_len x m`` array (columns ``A* e_i``)."""
        return self.T.T.toarray() * self._ginv[:, None]

    @cached_property
    def aat(self) -> np.ndarray:
        """Dense ``A A*``."""
        M = np.asarray((self.T.multiply(self._ginv[None, :]) @ self.T.T).todense())
        return 0.5 * (M + M.T)

    @cached_property
    def aat_factor(self):
        """Cholesky factor of ``A A*``; raises RankDeficient if A is not onto."""
        M = self.aat
        try:
            c = scipy.linalg.cho_factor(M, lower=True)
        except np.linalg.LinAlgError as exc:
            raise RankDeficient("A A* is not positive definite; A lacks full row rank") from exc
        # pivots are squared diagonal entries; compare them at rounding level
        piv = np.diag(c[0]) ** 2
        if piv.min() <= 64 * np.finfo(float).eps * piv.max():
            raise RankDeficient("A A* is numerically singular; A lacks full row rank")
        return c

    def __eq__(self, other):
        if not isinstance(other, LinearMap):
            return NotImplemented
        if self.shape != other.shape or self.cone != other.cone:
            return False
        a, b = self.triplets(), other.triplets()
        return all(np.array_equal(u, v) for u, v in zip(a, b))

    __hash__ = None


@dataclass
class ScmMatrix:
    """Dense symmetric Schur complement with its (possibly shifted) factor."""

    matrix: np.ndarray
    factor: object = None
    shift: float = 0.0
    _eigs: np.ndarray = field(default=None, repr=False)

    @property
    def m(self) -> int:
        return self.matrix.shape[0]

    def factorize(self):
        if self.factor is not None:
            return self.factor
        M = self.matrix
        m = M.shape[0]
        scale = max(np.trace(M) / max(m, 1), np.finfo(float).tiny)
        for rel in SHIFT_LADDER:
            shift = rel * scale
            try:
                c = scipy.linalg.cho_factor(M + shift * np.eye(m), lower=True, check_finite=True)
            except (np.linalg.LinAlgError, ValueError):
                continue
            if np.all(np.diag(c[0]) > 0):
                self.factor, self.shift = c, shift
                return c
        raise RankDeficient(
            f"Schur complement not positive definite after shift {SHIFT_LADDER[-1]:g}*trace/m"
        )


def scm_assemble(A: LinearMap, s_spec: Spectral, z_spec: Spectral) -> ScmMatrix:
    """``M = A L(z) L(z+s)^{-1} A*``, one weighted column per constraint."""
    WA = weight_apply(s_spec, z_spec, A.adjoint_dense)
    M = np.asarray(A.T @ WA)
    return ScmMatrix(0.5 * (M + M.T))


def scm_solve(M: ScmMatrix, r, refine: int = 2) -> np.ndarray:
    """Solve ``M d = r`` by Cholesky with iterative refinement."""
    if not isinstance(M, ScmMatrix):
        M = ScmMatrix(np.asarray(M, dtype=float))
    r = np.asarray(r, dtype=float)
    c = M.factorize()
    d = scipy.linalg.cho_solve(c, r)
    for _ in range(refine):
        res = r - M.matrix @ d
        if np.linalg.norm(res) <= 1e-14 * (1.0 + np.linalg.norm(r)):
            break
        d = d + scipy.linalg.cho_solve(c, res)
    return d


def cond_number(M) -> float:
    """Spectral condition number ``lambda_max / lambda_min`` of a dense SPD matrix."""
    mat = M.matrix if isinstance(M, ScmMatrix) else np.asarray(M, dtype=float)
    if mat.shape[0] > MAX_DENSE_M:
        raise ValueError(f"dense eigensolve limited to m <= {MAX_DENSE_M}")
    w = np.linalg.eigvalsh(mat)
    if w[0] <= 0:
        raise NonPositiveEigenvalue(f"smallest eigenvalue {w[0]!r} is not positive")
    return float(w[-1] / w[0])
