"""Euclidean Jordan algebra kernels for products of symmetric cones.

Three block kinds are supported: the nonnegative orthant, the second-order
(Lorentz) cone and the cone of positive semidefinite matrices.  Elements are
plain 1-D numpy arrays whose coordinates are laid out block after block:

* ``Orthant(n)``: ``n`` coordinates, one per component.
* ``SecondOrder(n)``: ``n`` coordinates ``(x0, xbar)``.
* ``Psd(p)``: ``p(p+1)/2`` coordinates of the scaled lower triangle, column
  major, off-diagonal entries multiplied by ``sqrt(2)`` (see :func:`svec`).

The algebra inner product is the trace form ``<x, y> = tr(x o y)``.  For
orthant and PSD blocks it coincides with the coordinate dot product; for a
second-order block it is twice the dot product.  :attr:`ConeDesc.gram` holds
these per-coordinate weights and :meth:`ConeDesc.inner` applies them.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence, Union

import numpy as np

from .errors import DimensionMismatch, DomainError, FrameMismatch, NotInterior

SQRT2 = np.sqrt(2.0)

# Sylvester denominators at or below this are treated as singular.
_TINY_DENOM = 1e-300


@dataclass(frozen=True)
class Orthant:
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"Orthant dimension must be >= 1, got {self.n}")

    @property
    def size(self) -> int:
        return self.n

    @property
    def rank(self) -> int:
        return self.n


@dataclass(frozen=True)
class SecondOrder:
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"SOC n >= 2 required, got {self.n}")

    @property
    def size(self) -> int:
        return self.n

    @property
    def rank(self) -> int:
        return 2


@dataclass(frozen=True)
class Psd:
    p: int

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 1:
            raise ValueError(f"PSD order must be >= 1, got {self.p}")

    @property
    def size(self) -> int:
        return self.p * (self.p + 1) // 2

    @property
    def rank(self) -> int:
        return self.p


Block = Union[Orthant, SecondOrder, Psd]


@dataclass(frozen=True)
class ConeDesc:
    """Ordered product of cone blocks."""

    blocks: tuple

    def __init__(self, blocks: Sequence[Block]):
        blocks = tuple(blocks)
        if not blocks:
            raise ValueError("a cone needs at least one block")
        for blk in blocks:
            if not isinstance(blk, (Orthant, SecondOrder, Psd)):
                raise TypeError(f"unknown cone block {blk!r}")
        object.__setattr__(self, "blocks", blocks)

    @cached_property
    def offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum([b.size for b in self.blocks])])

    @property
    def vec_len(self) -> int:
        return int(self.offsets[-1])

    @property
    def rank(self) -> int:
        return sum(b.rank for b in self.blocks)

    nu = rank

    @cached_property
    def slices(self) -> tuple:
        off = self.offsets
        return tuple(slice(int(off[i]), int(off[i + 1])) for i in range(len(self.blocks)))

    @cached_property
    def gram(self) -> np.ndarray:
        """Per-coordinate weights turning the dot product into the trace form."""
        g = np.ones(self.vec_len)
        for blk, sl in zip(self.blocks, self.slices):
            if isinstance(blk, SecondOrder):
                g[sl] = 2.0
        return g

    @property
    def is_lp(self) -> bool:
        return all(isinstance(b, Orthant) for b in self.blocks)

    def check(self, x: np.ndarray, name: str = "x") -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[0] != self.vec_len:
            raise DimensionMismatch(
                f"{name} has length {x.shape[0]}, cone expects {self.vec_len}"
            )
        return x

    def inner(self, x, y) -> float:
        return float(np.dot(self.gram * self.check(x), self.check(y, "y")))

    def norm(self, x) -> float:
        return float(np.sqrt(self.inner(x, x)))

    def split(self, x) -> list:
        x = self.check(x)
        return [x[sl] for sl in self.slices]

    def __repr__(self):
        parts = []
        for b in self.blocks:
            if isinstance(b, Orthant):
                parts.append(f"NN({b.n})")
            elif isinstance(b, SecondOrder):
                parts.append(f"SOC({b.n})")
            else:
                parts.append(f"PSD({b.p})")
        return "ConeDesc(" + " x ".join(parts) + ")"


# -- scaled vectorization of symmetric matrices ------------------------------


def _tril_index(p: int):
    rows, cols = [], []
    for j in range(p):
        for i in range(j, p):
            rows.append(i)
            cols.append(j)
    rows = np.array(rows, dtype=int)
    cols = np.array(cols, dtype=int)
    scale = np.where(rows == cols, 1.0, SQRT2)
    return rows, cols, scale


_TRIL_CACHE: dict = {}


def _tril(p: int):
    if p not in _TRIL_CACHE:
        _TRIL_CACHE[p] = _tril_index(p)
    return _TRIL_CACHE[p]


def psd_order(length: int) -> int:
    p = int(round((np.sqrt(8 * length + 1) - 1) / 2))
    if p * (p + 1) // 2 != length:
        raise DimensionMismatch(f"{length} is not a triangular number")
    return p


def svec(X: np.ndarray) -> np.ndarray:
    """Scaled lower-triangle vectorization; works on a stack ``(..., p, p)``."""
    X = np.asarray(X, dtype=float)
    rows, cols, scale = _tril(X.shape[-1])
    return X[..., rows, cols] * scale


def smat(v: np.ndarray) -> np.ndarray:
    """Inverse of :func:`svec`; a stack ``(k, len)`` gives ``(k, p, p)``."""
    v = np.asarray(v, dtype=float)
    p = psd_order(v.shape[-1])
    rows, cols, scale = _tril(p)
    X = np.zeros(v.shape[:-1] + (p, p))
    vals = v / scale
    X[..., rows, cols] = vals
    X[..., cols, rows] = vals
    return X


# -- Jordan product and friends ----------------------------------------------


def identity(cone: ConeDesc) -> np.ndarray:
    e = np.zeros(cone.vec_len)
    for blk, sl in zip(cone.blocks, cone.slices):
        if isinstance(blk, Orthant):
            e[sl] = 1.0
        elif isinstance(blk, SecondOrder):
            e[sl.start] = 1.0
        else:
            e[sl] = svec(np.eye(blk.p))
    return e


def jordan_product(cone: ConeDesc, x, y) -> np.ndarray:
    x = cone.check(x)
    y = cone.check(y, "y")
    out = np.empty(cone.vec_len)
    for blk, sl in zip(cone.blocks, cone.slices):
        xb, yb = x[sl], y[sl]
        if isinstance(blk, Orthant):
            out[sl] = xb * yb
        elif isinstance(blk, SecondOrder):
            out[sl.start] = xb @ yb
            out[sl.start + 1 : sl.stop] = xb[0] * yb[1:] + yb[0] * xb[1:]
        else:
            X, Y = smat(xb), smat(yb)
            XY = X @ Y
            out[sl] = svec(0.5 * (XY + XY.T))
    return out


def lyapunov_apply(cone: ConeDesc, x, y) -> np.ndarray:
    """Apply the Lyapunov operator ``L(x)`` to ``y``; same as ``x o y``."""
    return jordan_product(cone, x, y)


def quad_rep_apply(cone: ConeDesc, x, y) -> np.ndarray:
    """Quadratic representation ``P(x) y = 2 x o (x o y) - (x o x) o y``."""
    xy = jordan_product(cone, x, y)
    xx = jordan_product(cone, x, x)
    return 2.0 * jordan_product(cone, x, xy) - jordan_product(cone, xx, y)


# -- spectral decomposition ---------------------------------------------------


@dataclass(frozen=True)
class BlockSpectral:
    """Eigenvalues of one block together with its Jordan frame.

    ``frame`` is ``None`` for an orthant block (standard basis), the unit
    tail direction ``ubar`` for a second-order block, and the orthonormal
    eigenvector matrix ``Q`` for a PSD block.  Eigenvalues are listed in frame
    order.
    """

    eigs: np.ndarray
    frame: object = None


@dataclass(frozen=True)
class Spectral:
    cone: ConeDesc
    blocks: tuple

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.concatenate([b.eigs for b in self.blocks])

    def with_eigs(self, eigs: Sequence[np.ndarray]) -> "Spectral":
        """Same Jordan frame, new eigenvalues (one array per block)."""
        return Spectral(
            self.cone,
            tuple(BlockSpectral(np.asarray(e, dtype=float), b.frame) for e, b in zip(eigs, self.blocks)),
        )

    def map(self, f: Callable[[np.ndarray], np.ndarray]) -> "Spectral":
        return self.with_eigs([f(b.eigs) for b in self.blocks])

    def recompose(self) -> np.ndarray:
        out = np.empty(self.cone.vec_len)
        for blk, sl, bs in zip(self.cone.blocks, self.cone.slices, self.blocks):
            lam = bs.eigs
            if isinstance(blk, Orthant):
                out[sl] = lam
            elif isinstance(blk, SecondOrder):
                out[sl.start] = 0.5 * (lam[0] + lam[1])
                out[sl.start + 1 : sl.stop] = 0.5 * (lam[0] - lam[1]) * bs.frame
            else:
                Q = bs.frame
                out[sl] = svec((Q * lam) @ Q.T)
        return out

    def idempotents(self) -> list:
        """The Jordan frame as a list of full-length elements (for checking)."""
        frame = []
        for bi, (blk, sl, bs) in enumerate(zip(self.cone.blocks, self.cone.slices, self.blocks)):
            for i in range(len(bs.eigs)):
                v = np.zeros(self.cone.vec_len)
                if isinstance(blk, Orthant):
                    v[sl.start + i] = 1.0
                elif isinstance(blk, SecondOrder):
                    sign = 1.0 if i == 0 else -1.0
                    v[sl.start] = 0.5
                    v[sl.start + 1 : sl.stop] = 0.5 * sign * bs.frame
                else:
                    q = bs.frame[:, i]
                    v[sl] = svec(np.outer(q, q))
                frame.append(v)
        return frame


def _soc_axis(tail: np.ndarray):
    nrm = float(np.linalg.norm(tail))
    if nrm == 0.0:
        u = np.zeros_like(tail)
        u[0] = 1.0
        return nrm, u
    return nrm, tail / nrm


def spectral(cone: ConeDesc, x) -> Spectral:
    """Spectral decomposition of any element (not only cone members).

    Second-order and PSD eigenvalues come out in descending order; orthant
    eigenvalues are the coordinates themselves, in place.
    """
    x = cone.check(x)
    out = []
    for blk, sl in zip(cone.blocks, cone.slices):
        xb = x[sl]
        if isinstance(blk, Orthant):
            out.append(BlockSpectral(xb.copy()))
        elif isinstance(blk, SecondOrder):
            nrm, u = _soc_axis(xb[1:])
            out.append(BlockSpectral(np.array([xb[0] + nrm, xb[0] - nrm]), u))
        else:
            w, Q = np.linalg.eigh(smat(xb))
            out.append(BlockSpectral(w[::-1].copy(), np.ascontiguousarray(Q[:, ::-1])))
    return Spectral(cone, tuple(out))


def _check_domain(spec: Spectral, ok: Callable[[np.ndarray], np.ndarray], what: str):
    for bi, bs in enumerate(spec.blocks):
        bad = ~ok(bs.eigs)
        if np.any(bad):
            lam = float(bs.eigs[np.argmax(bad)])
            raise DomainError(f"{what} undefined: eigenvalue {lam!r} in block {bi}", lam, bi)


def map_eigs(spec: Spectral, f: Union[str, Callable], *args) -> np.ndarray:
    """Extend a scalar function to the algebra through the spectral map.

    ``f`` is one of ``"square"``, ``"sqrt"``, ``"inverse"``,
    ``"shift_scale"`` (with extra ``scale, shift`` arguments, giving
    ``scale * lam + shift``), or any vectorized callable.
    """
    if f == "square":
        return spec.map(np.square).recompose()
    if f == "sqrt":
        _check_domain(spec, lambda lam: lam >= 0, "sqrt")
        return spec.map(np.sqrt).recompose()
    if f == "inverse":
        _check_domain(spec, lambda lam: lam != 0, "inverse")
        return spec.map(np.reciprocal).recompose()
    if f == "shift_scale":
        scale, shift = args
        return spec.map(lambda lam: scale * lam + shift).recompose()
    if callable(f):
        return spec.map(f).recompose()
    raise ValueError(f"unknown scalar map {f!r}")


@dataclass(frozen=True)
class EigInfo:
    trace: float
    det: float
    block_trace: tuple
    block_det: tuple
    lambda_min: float
    lambda_max: float
    in_interior: bool


def eig_queries(spec: Spectral) -> EigInfo:
    btr = tuple(float(np.sum(b.eigs)) for b in spec.blocks)
    bdet = tuple(float(np.prod(b.eigs)) for b in spec.blocks)
    lam = spec.eigenvalues
    lmin, lmax = float(lam.min()), float(lam.max())
    return EigInfo(
        trace=float(sum(btr)),
        det=float(np.prod(bdet)),
        block_trace=btr,
        block_det=bdet,
        lambda_min=lmin,
        lambda_max=lmax,
        in_interior=lmin > 0,
    )


def _require_interior(spec: Spectral, name: str = "x"):
    lmin = float(spec.eigenvalues.min())
    if not lmin > 0:
        raise NotInterior(f"{name} is not in the cone interior (min eigenvalue {lmin!r})")


@dataclass(frozen=True)
class BarrierValue:
    value: float
    grad: np.ndarray


def barrier(spec: Spectral) -> BarrierValue:
    """Natural barrier ``-ln det x`` and its gradient ``-x^{-1}``."""
    _require_interior(spec)
    value = -float(np.sum(np.log(spec.eigenvalues)))
    grad = -spec.map(np.reciprocal).recompose()
    return BarrierValue(value, grad)


# -- operators diagonal in a Jordan frame --------------------------------------


def _frame_apply(spec: Spectral, y: np.ndarray, coefs) -> np.ndarray:
    """Apply ``sum_i a_i P_ii + sum_{i<j} b_ij P_ij`` block by block.

    ``coefs(block_index)`` returns ``(a, B)`` with ``B`` a symmetric matrix
    whose diagonal is ignored.  ``y`` may be one element or a matrix whose
    columns are elements.
    """
    cone = spec.cone
    y = np.asarray(y, dtype=float)
    vec = y.ndim == 1
    Y = y[:, None] if vec else y
    if Y.shape[0] != cone.vec_len:
        raise DimensionMismatch(f"operand has length {Y.shape[0]}, cone expects {cone.vec_len}")
    out = np.empty_like(Y)
    for bi, (blk, sl, bs) in enumerate(zip(cone.blocks, cone.slices, spec.blocks)):
        a, B = coefs(bi)
        Yb = Y[sl]
        if isinstance(blk, Orthant):
            out[sl] = a[:, None] * Yb
        elif isinstance(blk, SecondOrder):
            u = bs.frame
            v1 = 0.5 * np.concatenate([[1.0], u])
            v2 = 0.5 * np.concatenate([[1.0], -u])
            P11 = np.outer(v1, 2.0 * (v1 @ Yb))
            P22 = np.outer(v2, 2.0 * (v2 @ Yb))
            P12 = Yb - P11 - P22
            out[sl] = a[0] * P11 + a[1] * P22 + B[0, 1] * P12
        else:
            Q = bs.frame
            G = B.copy()
            np.fill_diagonal(G, a)
            Ym = smat(Yb.T)
            Yt = np.einsum("ji,kjl,lm->kim", Q, Ym, Q, optimize=True)
            Wm = np.einsum("ij,kjl,ml->kim", Q, Yt * G, Q, optimize=True)
            out[sl] = svec(Wm).T
    return out[:, 0] if vec else out


def lyapunov_solve(spec: Spectral, y) -> np.ndarray:
    """Solve ``x o w = y`` for ``w`` given the spectral decomposition of ``x``."""
    _require_interior(spec)
    cone = spec.cone
    y = cone.check(y, "y")
    out = np.empty(cone.vec_len)
    for blk, sl, bs in zip(cone.blocks, cone.slices, spec.blocks):
        lam, yb = bs.eigs, y[sl]
        if isinstance(blk, Orthant):
            out[sl] = yb / lam
        elif isinstance(blk, SecondOrder):
            # arrow matrix [[x0, xbar'], [xbar, x0 I]]
            x0 = 0.5 * (lam[0] + lam[1])
            xbar = 0.5 * (lam[0] - lam[1]) * bs.frame
            det = lam[0] * lam[1]
            w0 = (x0 * yb[0] - xbar @ yb[1:]) / det
            out[sl.start] = w0
            out[sl.start + 1 : sl.stop] = (yb[1:] - w0 * xbar) / x0
        else:
            denom = lam[:, None] + lam[None, :]
            if np.any(denom <= _TINY_DENOM):
                raise NotInterior("degenerate Sylvester denominator")
            Q = bs.frame
            Yt = Q.T @ smat(yb) @ Q
            out[sl] = svec(Q @ (2.0 * Yt / denom) @ Q.T)
    return out


def _same_frame(f1, f2) -> bool:
    if f1 is f2:
        return True
    if f1 is None or f2 is None:
        return False
    return f1.shape == f2.shape and np.array_equal(f1, f2)


def weight_coefficients(s_spec: Spectral, z_spec: Spectral, bi: int):
    """Eigenvalues of ``L(z) L(z+s)^{-1}`` on block ``bi``: ``(diag, pair)``."""
    s = s_spec.blocks[bi].eigs
    z = z_spec.blocks[bi].eigs
    a = z / (z + s)
    zz = z[:, None] + z[None, :]
    B = zz / (zz + s[:, None] + s[None, :])
    return a, B


def weight_apply(s_spec: Spectral, z_spec: Spectral, y) -> np.ndarray:
    """Apply ``L(z) L(z+s)^{-1}`` for ``s``, ``z`` sharing one Jordan frame.

    ``y`` may be a single element or a matrix of element columns.
    """
    if s_spec.cone != z_spec.cone:
        raise FrameMismatch("s and z live on different cones")
    for bs, bz in zip(s_spec.blocks, z_spec.blocks):
        if not _same_frame(bs.frame, bz.frame):
            raise FrameMismatch("s and z do not share a Jordan frame")
    _require_interior(s_spec, "s")
    _require_interior(z_spec, "z")
    return _frame_apply(s_spec, y, lambda bi: weight_coefficients(s_spec, z_spec, bi))


def weight_eigenvalues(s_spec: Spectral, z_spec: Spectral) -> np.ndarray:
    """All eigenvalues of the weight operator, with multiplicity."""
    vals = []
    for bi, blk in enumerate(s_spec.cone.blocks):
        a, B = weight_coefficients(s_spec, z_spec, bi)
        vals.append(a)
        if isinstance(blk, SecondOrder):
            vals.append(np.full(blk.n - 2, B[0, 1]))
        elif isinstance(blk, Psd):
            iu = np.triu_indices(blk.p, 1)
            vals.append(B[iu])
    return np.concatenate(vals)
