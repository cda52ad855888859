"""Conditioning scans, benchmark statistics and their CSV outputs."""

from __future__ import annotations

import csv
import dataclasses
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .cones import weight_eigenvalues
from .errors import ConeNotSupported
from .linalg import MAX_DENSE_M, cond_number
from .nal import SolverConfig, solve
from .probio.problem import Problem

SHIFT_BY_CLASS = {"sdp": 100.0, "socp": 10.0, "lp": 1.0}
MAXTIME_BY_CLASS = {"sdp": 43200.0, "socp": 7200.0, "lp": 3600.0}

# rows with mu above this are pre-asymptotic and left out of slope fits
SLOPE_MU_MAX = 1e-2


def _fmt(v) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def ipm_weight_lp(x, s, cone=None) -> np.ndarray:
    """Diagonal ``x / s`` of the classical interior-point normal equations."""
    if cone is not None and not cone.is_lp:
        raise ConeNotSupported("the diagonal interior-point weight is defined for LP cones only")
    x = np.asarray(x, dtype=float)
    s = np.asarray(s, dtype=float)
    if x.shape != s.shape:
        raise ValueError("x and s differ in shape")
    if np.any(x <= 0) or np.any(s <= 0):
        raise ValueError("x and s must be strictly positive")
    with np.errstate(over="ignore", divide="ignore"):
        return np.clip(x / s, 1e-300, 1e300)


def ipm_scm(problem: Problem, x, s) -> np.ndarray:
    D = ipm_weight_lp(x, s, problem.cone)
    T = problem.A.T
    M = np.asarray((T.multiply(D[None, :]) @ T.T).todense())
    return 0.5 * (M + M.T)


def fit_slope(mu, cond) -> float:
    """Least-squares slope of ``log10 cond`` against ``log10 mu``."""
    lx = np.log10(np.asarray(mu, dtype=float))
    ly = np.log10(np.asarray(cond, dtype=float))
    if len(lx) < 2:
        return math.nan
    return float(np.polyfit(lx, ly, 1)[0])


def geometric_mean(v) -> float:
    v = np.asarray(v, dtype=float)
    v = v[np.isfinite(v)]
    return float(np.exp(np.mean(np.log(v)))) if len(v) else math.nan


@dataclass
class CondRow:
    k: int
    mu: float
    cond_nal: float
    cond_ipm: Optional[float]
    weight_min: float
    weight_max: float


@dataclass
class CondScanResult:
    problem: str
    rows: list = field(default_factory=list)
    cond_aat: float = math.nan

    @property
    def mu(self) -> np.ndarray:
        return np.array([r.mu for r in self.rows])

    def _fit_rows(self, attr):
        pts = [(r.mu, getattr(r, attr)) for r in self.rows
               if r.mu <= SLOPE_MU_MAX and getattr(r, attr) is not None]
        return [p[0] for p in pts], [p[1] for p in pts]

    @property
    def slope_nal(self) -> float:
        return fit_slope(*self._fit_rows("cond_nal"))

    @property
    def slope_ipm(self) -> float:
        return fit_slope(*self._fit_rows("cond_ipm"))

    @property
    def gmean_nal(self) -> float:
        return geometric_mean([r.cond_nal for r in self.rows])

    @property
    def gmean_ipm(self) -> float:
        return geometric_mean([r.cond_ipm for r in self.rows if r.cond_ipm is not None])

    def bound_holds(self, rtol: float = 1e-8) -> bool:
        """``cond_nal <= cond(A A*) / lambda_min(weight)`` on every row."""
        return all(r.cond_nal <= self.cond_aat / r.weight_min * (1 + rtol) for r in self.rows)


class _ScanDone(Exception):
    pass


def cond_scan(
    problem: Problem,
    cfg: Optional[SolverConfig] = None,
    mu_max: float = 1e-1,
    mu_min: float = 1e-5,
    compare_ipm: bool = True,
) -> CondScanResult:
    """Condition numbers of the Newton system over the barrier schedule.

    The solver runs with ``mu0 = mu_max``; at the first inner step of each
    outer iteration with ``mu >= mu_min`` the Schur complement is
    eigensolved.  For LP cones the diagonal ``x/s`` system at the same
    iterate is added when ``x`` is interior (it is not at ``k = 0``).
    """
    if problem.m > MAX_DENSE_M:
        raise ValueError(f"cond_scan needs m <= {MAX_DENSE_M}")
    cfg = cfg or SolverConfig()
    cfg = dataclasses.replace(cfg, mu0=mu_max, tol=min(cfg.tol, 0.5 * mu_min * cfg.sigma),
                              max_outer=max(cfg.max_outer, 1))
    compare_ipm = compare_ipm and problem.cone.is_lp
    out = CondScanResult(problem.name, cond_aat=cond_number(problem.A.aat))
    floor = mu_min * (1 - 1e-12)

    def record(state, step):
        if state.j != 0:
            return
        if state.mu < floor:
            raise _ScanDone
        w = weight_eigenvalues(state.pair.s_spec, state.pair.z_spec)
        c_ipm = None
        if compare_ipm and np.all(state.x > 0):
            c_ipm = cond_number(ipm_scm(problem, state.x, state.pair.s))
        out.rows.append(CondRow(state.k, state.mu, cond_number(step.scm), c_ipm,
                                float(w.min()), float(w.max())))

    try:
        solve(problem, cfg, callback=record)
    except _ScanDone:
        pass
    return out


def write_condscan_csv(results: Sequence[CondScanResult], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["problem", "k", "mu", "cond_nal", "cond_ipm"])
        for res in results:
            for r in res.rows:
                w.writerow([res.problem, r.k, _fmt(r.mu), _fmt(r.cond_nal), _fmt(r.cond_ipm)])


def write_heatmap_csv(results: Sequence[CondScanResult], path) -> None:
    """Problem by method table of log10 geometric-mean condition numbers."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["problem", "method", "log10_gmean_cond"])
        for res in results:
            w.writerow([res.problem, "nal", _fmt(math.log10(res.gmean_nal))])
            if not math.isnan(res.gmean_ipm):
                w.writerow([res.problem, "ipm", _fmt(math.log10(res.gmean_ipm))])


def sgm(times, sh: Optional[float] = None, maxtime: Optional[float] = None,
        cls: Optional[str] = None) -> float:
    """Shifted geometric mean ``prod(t_i + sh)^(1/n) - sh``.

    ``sh`` and ``maxtime`` default from the problem class (sdp, socp, lp).
    Entries that are None, NaN or infinite count as failures and are
    replaced by ``maxtime``.
    """
    if cls is not None:
        cls = cls.lower()
        if cls not in SHIFT_BY_CLASS:
            raise ValueError(f"unknown problem class {cls!r}")
        sh = SHIFT_BY_CLASS[cls] if sh is None else sh
        maxtime = MAXTIME_BY_CLASS[cls] if maxtime is None else maxtime
    if sh is None:
        raise ValueError("give sh or a problem class")
    if not sh > 0:
        raise ValueError("sh must be positive")
    t = np.array([math.nan if v is None else v for v in times], dtype=float)
    if t.size == 0:
        raise ValueError("need at least one time")
    bad = ~np.isfinite(t)
    if bad.any():
        if maxtime is None:
            raise ValueError("failed runs present but no maxtime given")
        t[bad] = maxtime
    if np.any(t < 0):
        raise ValueError("times must be nonnegative")
    return float(np.exp(np.mean(np.log(t + sh))) - sh)


@dataclass
class Profile:
    solvers: list
    taus: np.ndarray
    rho: np.ndarray  # solvers x taus

    def curve(self, solver) -> np.ndarray:
        return self.rho[self.solvers.index(solver)]

    def at(self, solver, tau: float) -> float:
        return float(self.rho[self.solvers.index(solver)][np.searchsorted(self.taus, tau, side="right") - 1])


def perf_profile(times, solvers: Optional[Sequence[str]] = None, taus=None) -> Profile:
    """Performance profiles ``rho_s(tau)`` from a solvers x problems time matrix.

    Failures are ``inf`` (or NaN).  The default ``tau`` grid holds every
    finite ratio, so the curves are exact step functions.
    """
    T = np.array(times, dtype=float)
    if T.ndim != 2 or T.shape[0] < 1 or T.shape[1] < 1:
        raise ValueError("need a solvers x problems matrix with at least one entry")
    T[np.isnan(T)] = math.inf
    if np.any(T <= 0):
        raise ValueError("times must be positive")
    best = T.min(axis=0)
    with np.errstate(invalid="ignore"):
        R = np.where(np.isfinite(best), T / best, math.inf)
    if taus is None:
        finite = R[np.isfinite(R)]
        taus = np.unique(np.concatenate([[1.0], finite]))
    taus = np.asarray(taus, dtype=float)
    rho = (R[:, None, :] <= taus[None, :, None]).mean(axis=2)
    names = list(solvers) if solvers is not None else [f"solver{i}" for i in range(T.shape[0])]
    return Profile(names, taus, rho)


@dataclass
class BenchTable:
    """Runtimes of each solver configuration on each problem."""

    problems: list
    solvers: list
    seconds: np.ndarray
    solved: np.ndarray
    cls: str = "lp"

    @property
    def maxtime(self) -> float:
        return MAXTIME_BY_CLASS[self.cls]

    def effective_times(self) -> np.ndarray:
        """Runtimes with failed runs set to MAXTIME."""
        return np.where(self.solved, self.seconds, self.maxtime)

    def sgm(self) -> dict:
        t = self.effective_times()
        return {s: sgm(t[i], cls=self.cls) for i, s in enumerate(self.solvers)}

    def solved_fraction(self) -> dict:
        return {s: float(np.mean(self.solved[i])) for i, s in enumerate(self.solvers)}

    def profile(self, taus=None) -> Profile:
        t = np.where(self.solved, self.seconds, math.inf)
        return perf_profile(t, self.solvers, taus)


def write_sgm_csv(table: BenchTable, path) -> None:
    g, f = table.sgm(), table.solved_fraction()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["class", "solver", "sgm", "solved_fraction"])
        for s in table.solvers:
            w.writerow([table.cls, s, _fmt(g[s]), _fmt(f[s])])


def write_profile_csv(profile: Profile, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["solver", "tau", "rho"])
        for i, s in enumerate(profile.solvers):
            for tau, r in zip(profile.taus, profile.rho[i]):
                w.writerow([s, _fmt(tau), _fmt(r)])
