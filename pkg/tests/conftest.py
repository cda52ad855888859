import numpy as np
import pytest

from nalscp.cones import ConeDesc, Orthant, Psd, SecondOrder, svec
from nalscp.linalg import LinearMap
from nalscp.probio.problem import Problem

MIXED = ConeDesc([Orthant(5), SecondOrder(4), Psd(6)])
SMALL_MIXED = ConeDesc([Orthant(2), SecondOrder(3), Psd(3)])


def random_element(cone, rng, interior=False):
    """Random element; with ``interior=True`` all eigenvalues lie in [0.2, 2.2]."""
    parts = []
    for blk in cone.blocks:
        if isinstance(blk, Orthant):
            v = rng.uniform(0.2, 2.2, blk.n) if interior else rng.standard_normal(blk.n)
        elif isinstance(blk, SecondOrder):
            if interior:
                tail = rng.standard_normal(blk.n - 1)
                tail *= rng.uniform(0, 1) / np.linalg.norm(tail)
                head = rng.uniform(1.2, 2.2)
                v = np.r_[head, tail]
            else:
                v = rng.standard_normal(blk.n)
        else:
            Q, _ = np.linalg.qr(rng.standard_normal((blk.p, blk.p)))
            lam = rng.uniform(0.2, 2.2, blk.p) if interior else rng.standard_normal(blk.p)
            v = svec((Q * lam) @ Q.T)
        parts.append(v)
    return np.concatenate(parts)


def random_problem(cone, m, rng):
    """Dense random full-rank problem with a strictly feasible primal point."""
    T = rng.standard_normal((m, cone.vec_len))
    x0 = random_element(cone, rng, interior=True)
    A = LinearMap.from_dense(T, cone)
    c = rng.standard_normal(cone.vec_len)
    return Problem(A, T @ x0, c, cone)


def tiny_lp():
    """min x1  s.t.  x1 + x2 = 1,  x >= 0."""
    cone = ConeDesc([Orthant(2)])
    return Problem(LinearMap(1, [0, 0], [0, 1], [1.0, 1.0], cone), [1.0], [1.0, 0.0], cone, name="tiny_lp")


def trace_sdp():
    """min <diag(1,2), X>  s.t.  tr X = 1,  X psd."""
    cone = ConeDesc([Psd(2)])
    A = LinearMap(1, [0, 0], [0, 2], [1.0, 1.0], cone)
    return Problem(A, [1.0], svec(np.diag([1.0, 2.0])), cone, name="trace_sdp")


def scalar_lp():
    """One-variable LP ``A = [1], b = 1, c = 1``."""
    cone = ConeDesc([Orthant(1)])
    return Problem(LinearMap(1, [0], [0], [1.0], cone), [1.0], [1.0], cone, name="scalar")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE = []


def record_criterion(number, ok, detail):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
