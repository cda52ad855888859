"""Newton augmented Lagrangian method.

Outer loop: a proximal-point step on the barrier problem with a shrinking
barrier parameter ``mu`` and penalty ``rho``.  Inner loop: damped Newton on
the smooth dual function ``eta(x, .; mu, rho)``, whose minimizer in the slack
``s`` is available in closed form through the spectral map.
"""

from __future__ import annotations

import logging
import math
import os
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .cones import Spectral, barrier, identity, jordan_product, spectral
from .errors import (
    MaxInnerExceeded,
    NalError,
    NonPositiveEigenvalue,
    NotInterior,
    RankDeficient,
)
from .linalg import ScmMatrix, cond_number, scm_assemble, scm_solve
from .probio.problem import Problem

log = logging.getLogger(__name__)

STEP_THRESHOLD = 2.0 - math.sqrt(3.0)

OPTIMAL = "Optimal"
MAX_OUTER = "MaxOuterExceeded"
NUMERICAL_FAILURE = "NumericalFailure"


def debug_enabled() -> bool:
    return os.environ.get("NAL_DEBUG", "") not in ("", "0")


@dataclass
class SolverConfig:
    mu0: float = 0.1
    rho0: float = 1.0
    sigma: float = 0.5
    rho_min: float = 1e-2
    kappa: float = 0.25
    tol: float = 1e-6
    max_outer: int = 100
    max_inner_per_outer: int = 200
    x0: Optional[np.ndarray] = None
    lam0: Optional[np.ndarray] = None
    record_cond: bool = False
    primal_stop: str = "both"

    def __post_init__(self):
        if not self.mu0 > 0:
            raise ValueError("mu0 must be positive")
        if not self.rho0 > 0:
            raise ValueError("rho0 must be positive")
        if not 0 < self.sigma < 1:
            raise ValueError("sigma must lie in (0, 1)")
        if not 0 < self.rho_min <= self.rho0:
            raise ValueError("rho_min must lie in (0, rho0]")
        if not 0 < self.kappa < 1:
            raise ValueError("kappa must lie in (0, 1)")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_outer < 0 or self.max_inner_per_outer < 1:
            raise ValueError("iteration limits must be positive")
        if self.primal_stop not in ("both", "scaled"):
            raise ValueError("primal_stop must be 'both' or 'scaled'")

    def mu_at(self, k: int) -> float:
        return self.mu0 * self.sigma**k

    def rho_at(self, k: int) -> float:
        return max(self.rho0 * 0.5**k, self.rho_min)


def outer_iterations_to(mu0: float, sigma: float, eps: float) -> int:
    """Smallest ``k`` with ``sigma**k * mu0 <= eps``."""
    k = max(0, math.ceil(math.log(mu0 / eps) / math.log(1.0 / sigma)))
    # guard the float log against an off-by-one at exact powers
    while k > 0 and mu0 * sigma ** (k - 1) <= eps:
        k -= 1
    while mu0 * sigma**k > eps:
        k += 1
    return k


@dataclass
class CentralPair:
    """Closed-form slack ``s`` and auxiliary ``z = s + u`` sharing u's frame."""

    s: np.ndarray
    z: np.ndarray
    s_spec: Spectral
    z_spec: Spectral
    u: np.ndarray


def _pair_eigs(lam_u: np.ndarray, t: float):
    root = np.hypot(lam_u, 2.0 * math.sqrt(t))
    pos = lam_u > 0
    s = np.empty_like(lam_u)
    z = np.empty_like(lam_u)
    # rationalized branches avoid subtracting nearly equal numbers
    s[pos] = 2.0 * t / (lam_u[pos] + root[pos])
    s[~pos] = 0.5 * (root[~pos] - lam_u[~pos])
    z[~pos] = 2.0 * t / (root[~pos] - lam_u[~pos])
    z[pos] = 0.5 * (root[pos] + lam_u[pos])
    return s, z


def compute_sz(problem: Problem, x, lam, mu: float, rho: float) -> CentralPair:
    if not (mu > 0 and rho > 0):
        raise ValueError("mu and rho must be positive")
    u = rho * np.asarray(x, dtype=float) - problem.c_elem + problem.A.apply_adjoint(lam)
    u_spec = spectral(problem.cone, u)
    t = rho * mu
    s_eigs, z_eigs = [], []
    for bs in u_spec.blocks:
        s_b, z_b = _pair_eigs(bs.eigs, t)
        s_eigs.append(s_b)
        z_eigs.append(z_b)
    s_spec = u_spec.with_eigs(s_eigs)
    z_spec = u_spec.with_eigs(z_eigs)
    return CentralPair(s_spec.recompose(), z_spec.recompose(), s_spec, z_spec, u)


@dataclass
class SolverState:
    x: np.ndarray
    lam: np.ndarray
    mu: float
    rho: float
    pair: Optional[CentralPair] = None
    k: int = 0
    j: int = 0
    total_newton: int = 0

    def refresh(self, problem: Problem) -> "SolverState":
        self.pair = compute_sz(problem, self.x, self.lam, self.mu, self.rho)
        return self

    @property
    def s(self):
        return self.pair.s

    @property
    def z(self):
        return self.pair.z


@dataclass
class IterRecord:
    k: int
    j: int
    mu: float
    rho: float
    delta: float
    alpha: float
    pinfeas: float
    dinfeas: float
    comp: float
    pinfeas_unscaled: float
    cond: Optional[float]
    cholesky_shift: float
    wallclock: float

    FIELDS = (
        "k", "j", "mu", "rho", "delta", "alpha", "pinfeas", "dinfeas", "comp",
        "pinfeas_unscaled", "cond", "cholesky_shift", "wallclock",
    )

    def as_row(self) -> list:
        return [getattr(self, f) for f in self.FIELDS]


def grad_eta(problem: Problem, state: SolverState) -> np.ndarray:
    """Gradient of eta in lambda: ``A z - rho b``."""
    return problem.A.apply_primal(state.pair.z) - state.rho * problem.b


def eval_eta(problem: Problem, state: SolverState) -> float:
    """Value of eta at the closed-form minimizing slack."""
    cone = problem.cone
    pair = state.pair
    r = problem.A.apply_adjoint(state.lam) + pair.s - problem.c_elem
    phi = barrier(pair.s_spec).value
    return (
        -state.rho * float(problem.b @ state.lam)
        + state.rho * state.mu * phi
        + state.rho * cone.inner(state.x, r)
        + 0.5 * cone.inner(r, r)
    )


def eta_hessian(problem: Problem, state: SolverState) -> ScmMatrix:
    return scm_assemble(problem.A, state.pair.s_spec, state.pair.z_spec)


@dataclass
class NewtonStep:
    dlam: np.ndarray
    delta: float
    grad: np.ndarray
    scm: ScmMatrix


def newton_step(problem: Problem, state: SolverState) -> NewtonStep:
    g = grad_eta(problem, state)
    M = eta_hessian(problem, state)
    dlam = scm_solve(M, -g)
    t = state.rho * state.mu
    delta = math.sqrt(max(0.0, -float(dlam @ g)) / t)
    if debug_enabled():
        quad = math.sqrt(max(0.0, float(dlam @ M.matrix @ dlam)) / t)
        assert abs(quad - delta) <= 1e-8 * max(1.0, delta), (quad, delta)
    return NewtonStep(dlam, delta, g, M)


def step_length(delta: float) -> float:
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    return 1.0 if delta < STEP_THRESHOLD else 1.0 / (1.0 + delta)


@dataclass
class Residuals:
    pinfeas: float
    dinfeas: float
    comp: float
    pinfeas_unscaled: float


def residuals(problem: Problem, state: SolverState) -> Residuals:
    """Relative primal/dual infeasibility and complementarity.

    ``pinfeas`` keeps the rho-scaled form ``|A z - rho b| / (1 + |b|)``;
    ``pinfeas_unscaled`` measures the candidate primal point ``z / rho``.
    """
    cone = problem.cone
    pair = state.pair
    nb = float(np.linalg.norm(problem.b))
    nc = cone.norm(problem.c_elem)
    Az = problem.A.apply_primal(pair.z)
    p = float(np.linalg.norm(Az - state.rho * problem.b)) / (1.0 + nb)
    r = problem.A.apply_adjoint(state.lam) + pair.s - problem.c_elem
    d = cone.norm(r) / (1.0 + nc)
    comp = cone.norm(jordan_product(cone, state.x, pair.s))
    pu = float(np.linalg.norm(Az / state.rho - problem.b)) / (1.0 + nb)
    return Residuals(p, d, comp, pu)


def _check_invariants(problem: Problem, state: SolverState):
    cone = problem.cone
    pair = state.pair
    t = state.rho * state.mu
    sz = jordan_product(cone, pair.s, pair.z)
    e = identity(cone)
    # evaluating s o z in coordinates loses about eps |s| |z| to rounding
    floor = 1e-13 * np.linalg.norm(pair.s) * np.linalg.norm(pair.z)
    assert np.max(np.abs(sz - t * e)) <= 1e-10 * t + floor, "central path"
    gap = pair.z - pair.s - pair.u
    assert np.linalg.norm(gap) <= 1e-10 * (1.0 + np.linalg.norm(pair.u)), "z - s != u"


def inner_solve(
    problem: Problem,
    state: SolverState,
    cfg: SolverConfig,
    records: Optional[list] = None,
    callback: Optional[Callable] = None,
    t_start: Optional[float] = None,
) -> np.ndarray:
    """Damped Newton on eta in lambda until the merit function is small.

    Mutates ``state`` (lambda, s, z, counters) and appends one
    :class:`IterRecord` per Newton system to ``records``.  Returns the
    accepted lambda.
    """
    if records is None:
        records = []
    if t_start is None:
        t_start = time.perf_counter()
    if state.pair is None:
        state.refresh(problem)
    debug = debug_enabled()
    steps = 0
    state.j = 0
    while True:
        if debug:
            _check_invariants(problem, state)
        step = newton_step(problem, state)
        if not (np.isfinite(step.delta) and np.all(np.isfinite(step.dlam))):
            raise FloatingPointError("non-finite Newton direction")
        nl = float(np.linalg.norm(state.lam))
        t = state.rho * state.mu
        if state.k == 0:
            threshold = cfg.kappa
        else:
            kappa_hat = math.inf if nl == 0.0 else 1.0 / (math.sqrt(t) * nl)
            threshold = min(cfg.kappa, kappa_hat)
        stop = step.delta <= threshold
        alpha = 0.0 if stop else step_length(step.delta)
        res = residuals(problem, state)
        cond = cond_number(step.scm) if cfg.record_cond else None
        records.append(
            IterRecord(
                k=state.k, j=state.j, mu=state.mu, rho=state.rho,
                delta=step.delta, alpha=alpha,
                pinfeas=res.pinfeas, dinfeas=res.dinfeas, comp=res.comp,
                pinfeas_unscaled=res.pinfeas_unscaled, cond=cond,
                cholesky_shift=step.scm.shift,
                wallclock=time.perf_counter() - t_start,
            )
        )
        state.total_newton += 1
        if callback is not None:
            callback(state, step)
        if stop:
            return state.lam
        if steps >= cfg.max_inner_per_outer:
            raise MaxInnerExceeded(
                f"inner loop exceeded {cfg.max_inner_per_outer} steps at outer iteration {state.k}",
                records,
            )
        state.lam = state.lam + alpha * step.dlam
        state.refresh(problem)
        steps += 1
        state.j += 1


@dataclass
class SolveResult:
    status: str
    x: np.ndarray
    lam: np.ndarray
    s: np.ndarray
    z: np.ndarray
    objective_primal: float
    objective_dual: float
    pinfeas: float
    dinfeas: float
    comp: float
    pinfeas_unscaled: float
    outer_iters: int
    newton_iters: int
    mu: float
    rho: float
    seconds: float
    records: list = field(default_factory=list)
    message: str = ""

    @property
    def gap(self) -> float:
        return abs(self.objective_primal - self.objective_dual)

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


def _primal_measure(res: Residuals, cfg: SolverConfig) -> float:
    if cfg.primal_stop == "scaled":
        return res.pinfeas
    return max(res.pinfeas, res.pinfeas_unscaled)


def solve(
    problem: Problem,
    cfg: Optional[SolverConfig] = None,
    callback: Optional[Callable] = None,
) -> SolveResult:
    """Run the NAL method on ``problem``.

    Stops when ``max(pinfeas, dinfeas, mu) <= tol``.  ``pinfeas`` measures
    ``A z - rho b``, so with ``rho`` near ``rho_min`` the returned ``x = z/rho``
    may violate ``A x = b`` by up to ``tol / rho``; with the default
    ``primal_stop="both"`` the unscaled residual must also be below ``tol``.
    ``primal_stop="scaled"`` uses the scaled residual alone.  ``outer_iters`` is the
    index ``k`` of the outer iteration at which the run ended, i.e. the number
    of completed (x, mu, rho) updates.  The returned primal point is
    ``z / rho`` from the last inner solve; ``objective_dual`` is ``b . lam``.

    Raises RankDeficient up front when A lacks full row rank; numerical
    breakdowns during the iteration end the run with status
    ``NumericalFailure`` and a message naming the iteration.
    """
    cfg = cfg or SolverConfig()
    problem.validate()
    n, m = problem.n, problem.m
    x = np.zeros(n) if cfg.x0 is None else np.array(cfg.x0, dtype=float)
    lam = np.zeros(m) if cfg.lam0 is None else np.array(cfg.lam0, dtype=float)
    if x.shape != (n,) or lam.shape != (m,):
        raise ValueError("x0 / lam0 have the wrong shape")
    state = SolverState(x=x, lam=lam, mu=cfg.mu_at(0), rho=cfg.rho_at(0))
    records: list = []
    t0 = time.perf_counter()
    status, message = NUMERICAL_FAILURE, ""
    res = None
    k = 0
    try:
        while True:
            state.k = k
            state.mu = cfg.mu_at(k)
            state.rho = cfg.rho_at(k)
            state.refresh(problem)
            inner_solve(problem, state, cfg, records, callback, t0)
            res = residuals(problem, state)
            log.debug(
                "k=%d mu=%.3e rho=%.3e pinf=%.3e dinf=%.3e newton=%d",
                k, state.mu, state.rho, res.pinfeas, res.dinfeas, state.total_newton,
            )
            if max(_primal_measure(res, cfg), res.dinfeas, state.mu) <= cfg.tol:
                status = OPTIMAL
                break
            if k >= cfg.max_outer:
                status = MAX_OUTER
                message = f"reached {cfg.max_outer} outer iterations"
                break
            state.x = state.pair.z / state.rho
            k += 1
    except (RankDeficient, MaxInnerExceeded, NonPositiveEigenvalue, NotInterior, FloatingPointError) as exc:
        status = NUMERICAL_FAILURE
        message = f"outer iteration {state.k}, inner step {state.j}: {exc}"
        log.warning(message)
    seconds = time.perf_counter() - t0
    if state.pair is None:
        try:
            state.refresh(problem)
        except NalError:
            pass
    if res is None and state.pair is not None:
        res = residuals(problem, state)
    pair = state.pair
    x_out = pair.z / state.rho if pair is not None else state.x
    return SolveResult(
        status=status,
        x=x_out,
        lam=state.lam,
        s=pair.s if pair is not None else np.full(n, np.nan),
        z=pair.z if pair is not None else np.full(n, np.nan),
        objective_primal=float(problem.c @ x_out),
        objective_dual=float(problem.b @ state.lam),
        pinfeas=res.pinfeas if res else math.nan,
        dinfeas=res.dinfeas if res else math.nan,
        comp=res.comp if res else math.nan,
        pinfeas_unscaled=res.pinfeas_unscaled if res else math.nan,
        outer_iters=k,
        newton_iters=state.total_newton,
        mu=state.mu,
        rho=state.rho,
        seconds=seconds,
        records=records,
        message=message,
    )
