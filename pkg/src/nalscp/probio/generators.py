"""Instance generators for the benchmark families.

Every generator is a pure function of its parameters and seed.  Randomness
comes from ``numpy.random.default_rng(seed)`` (PCG64 seeded through
``SeedSequence``), so the same call always yields bit-identical data.

Conic encodings
---------------
Minimum enclosing ball of points ``p_1..p_N`` in ``R^d``::

    min r  s.t.  y_i0 - r = 0,  ybar_i - c+ + c- = -p_i,
                 (r, c+, c-) >= 0,  y_i in SOC(d+1)

so that ``y_i = (r, c - p_i)`` with center ``c = c+ - c-``.

Square-root Lasso ``min |D x - d|_2 + lam |x|_1``::

    min t + lam 1'(x+ + x-)  s.t.  r - D x+ + D x- = -d,
                 (x+, x-) >= 0,  (t, r) in SOC(m+1)

Max-cut relaxation ``min <-L/4, X>  s.t.  diag(X) = 1,  X psd``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..cones import ConeDesc, Orthant, Psd, SecondOrder, svec
from ..linalg import LinearMap
from .problem import Problem

FAMILIES = ("meb", "sqrt_lasso", "maxcut_sdp", "random_lp")


def gen_meb(N: int, d: int, seed: int = 0, points=None) -> Problem:
    """Minimum enclosing ball; ``points`` (shape ``(N, d)``) bypasses the RNG."""
    if points is None:
        if N < 1 or d < 1:
            raise ValueError("need N >= 1 and d >= 1")
        rng = np.random.default_rng(seed)
        points = rng.uniform(-1.0, 1.0, size=(N, d))
    else:
        points = np.asarray(points, dtype=float).reshape(N, d)
    nv = 2 * d + 1
    cone = ConeDesc([Orthant(nv)] + [SecondOrder(d + 1)] * N)
    rows, cols, vals = [], [], []
    b = np.empty(N * (d + 1))
    for i in range(N):
        y0 = nv + i * (d + 1)
        r0 = i * (d + 1)
        rows += [r0, r0]
        cols += [y0, 0]
        vals += [1.0, -1.0]
        b[r0] = 0.0
        for a in range(d):
            rr = r0 + 1 + a
            rows += [rr, rr, rr]
            cols += [y0 + 1 + a, 1 + a, 1 + d + a]
            vals += [1.0, -1.0, 1.0]
            b[rr] = -points[i, a]
    c = np.zeros(cone.vec_len)
    c[0] = 1.0
    A = LinearMap(N * (d + 1), rows, cols, vals, cone)
    meta = {"family": "meb", "N": N, "d": d, "seed": seed}
    return Problem(A, b, c, cone, name=f"meb_{N}_{d}_s{seed}", metadata=meta)


def meb_center_radius(problem: Problem, x) -> tuple:
    """Read ``(center, radius)`` off a solution of a :func:`gen_meb` problem."""
    d = problem.metadata["d"] if "d" in problem.metadata else problem.cone.blocks[1].n - 1
    x = np.asarray(x)
    return x[1 : 1 + d] - x[1 + d : 1 + 2 * d], float(x[0])


def meb_points(problem: Problem) -> np.ndarray:
    """Recover the points from the right-hand side of an MEB instance."""
    d = problem.cone.blocks[1].n - 1
    N = len(problem.cone.blocks) - 1
    return -problem.b.reshape(N, d + 1)[:, 1:]


def gen_sqrt_lasso(m: int, n: int, lam_reg: float = 1.0, seed: int = 0, data=None) -> Problem:
    """Square-root Lasso; ``data=(D, d)`` bypasses the RNG."""
    if data is None:
        if m < 1 or n < 1:
            raise ValueError("need m >= 1 and n >= 1")
        rng = np.random.default_rng(seed)
        D = rng.standard_normal((m, n))
        planted = np.zeros(n)
        k = max(1, int(round(0.1 * n)))
        support = rng.choice(n, size=k, replace=False)
        planted[support] = rng.standard_normal(k)
        d = D @ planted + 0.01 * rng.standard_normal(m)
    else:
        D, d = (np.asarray(a, dtype=float) for a in data)
        D = D.reshape(m, n)
        d = d.reshape(m)
    cone = ConeDesc([Orthant(2 * n), SecondOrder(m + 1)])
    # columns: x+ (0..n-1), x- (n..2n-1), t (2n), r (2n+1..2n+m)
    T = np.zeros((m, cone.vec_len))
    T[:, :n] = -D
    T[:, n : 2 * n] = D
    T[:, 2 * n + 1 :] = np.eye(m)
    c = np.zeros(cone.vec_len)
    c[: 2 * n] = lam_reg
    c[2 * n] = 1.0
    A = LinearMap.from_dense(T, cone)
    meta = {"family": "sqrt_lasso", "m": m, "n": n, "lam_reg": lam_reg, "seed": seed}
    return Problem(A, -d, c, cone, name=f"lasso_{m}_{n}_s{seed}", metadata=meta)


def lasso_coefficients(problem: Problem, x) -> np.ndarray:
    n = problem.metadata["n"]
    return np.asarray(x[:n]) - np.asarray(x[n : 2 * n])


def random_graph(p: int, seed: int, prob: float = 0.5) -> np.ndarray:
    rng = np.random.default_rng(seed)
    upper = np.triu(rng.random((p, p)) < prob, 1)
    return (upper | upper.T).astype(float)


def gen_maxcut_sdp(p: int, seed: int = 0, adjacency=None) -> Problem:
    """Max-cut SDP relaxation on G(p, 0.5); ``adjacency`` bypasses the RNG."""
    if adjacency is None:
        if p < 2:
            raise ValueError("need p >= 2")
        W = random_graph(p, seed)
    else:
        W = np.asarray(adjacency, dtype=float)
        p = W.shape[0]
    L = np.diag(W.sum(axis=1)) - W
    cone = ConeDesc([Psd(p)])
    diag_pos = [sum(p - jj for jj in range(j)) for j in range(p)]
    A = LinearMap(p, np.arange(p), diag_pos, np.ones(p), cone)
    meta = {"family": "maxcut_sdp", "p": p, "seed": seed}
    return Problem(A, np.ones(p), svec(-0.25 * L), cone, name=f"maxcut_{p}_s{seed}", metadata=meta)


def gen_random_lp(m: int, n: int, seed: int = 0, density: float = 0.3, basic=None) -> Problem:
    """Sparse LP with a known strictly feasible primal-dual pair.

    ``metadata`` keeps the planted ``x0``, ``s0`` and ``lam0``.  With
    ``basic=k`` (``1 <= k < m``) the planted pair is instead an optimal,
    strictly complementary solution whose primal part has only ``k``
    positive entries, so the optimum is primal degenerate; ``x0`` and
    ``s0`` then sit on the boundary of the orthant.
    """
    if not 1 <= m < n:
        raise ValueError("need 1 <= m < n")
    if basic is not None and not 1 <= basic < m:
        raise ValueError("need 1 <= basic < m")
    rng = np.random.default_rng(seed)
    while True:
        mask = rng.random((m, n)) < density
        T = np.where(mask, rng.standard_normal((m, n)), 0.0)
        if np.linalg.matrix_rank(T) == m:
            break
    if basic is None:
        x0 = rng.uniform(0.5, 1.5, n)
        s0 = rng.uniform(0.5, 1.5, n)
    else:
        x0 = np.zeros(n)
        s0 = np.zeros(n)
        support = rng.choice(n, size=basic, replace=False)
        x0[support] = rng.uniform(0.5, 1.5, basic)
        rest = np.setdiff1d(np.arange(n), support)
        s0[rest] = rng.uniform(0.5, 1.5, n - basic)
    lam0 = rng.standard_normal(m)
    cone = ConeDesc([Orthant(n)])
    A = LinearMap.from_dense(T, cone)
    meta = {"family": "random_lp", "m": m, "n": n, "seed": seed, "basic": basic,
            "x0": x0, "s0": s0, "lam0": lam0}
    name = f"lp_{m}_{n}_s{seed}" if basic is None else f"lp_{m}_{n}_b{basic}_s{seed}"
    return Problem(A, T @ x0, T.T @ lam0 + s0, cone, name=name, metadata=meta)


@dataclass(frozen=True)
class GeneratorSpec:
    family: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def build(self) -> Problem:
        p = dict(self.params)
        if self.family == "meb":
            return gen_meb(int(p["N"]), int(p["d"]), self.seed)
        if self.family == "sqrt_lasso":
            return gen_sqrt_lasso(int(p["m"]), int(p["n"]), float(p.get("lam_reg", 1.0)), self.seed)
        if self.family == "maxcut_sdp":
            return gen_maxcut_sdp(int(p["p"]), self.seed)
        basic = p.get("basic")
        return gen_random_lp(int(p["m"]), int(p["n"]), self.seed,
                             basic=None if basic is None else int(basic))


def generate(spec: GeneratorSpec) -> Problem:
    return spec.build()
