import itertools
import re
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nalscp.cones import ConeDesc, Orthant, Psd, SecondOrder, smat
from nalscp.errors import ParseError, UnsupportedFeature
from nalscp.linalg import LinearMap
from nalscp.nal import OPTIMAL, solve
from nalscp.probio import GeneratorSpec, Problem, gen_maxcut_sdp, gen_meb, gen_random_lp, gen_sqrt_lasso
from nalscp.probio.generators import lasso_coefficients, meb_center_radius, meb_points, random_graph
from nalscp.probio.mps import parse_mps_lp, read_mps, recover_mps_solution
from nalscp.probio.nalp import parse_nalp, read_nalp, save_nalp, write_nalp

from conftest import MIXED, random_problem

DATA = Path(__file__).parent / "data"

MINIMAL = """NALP 1
CONES 1
NN 1
DIMS 1 1
A 1
0 0 1.0
B 1
1.0
C 1
1.0
END
"""


def all_generated():
    return [
        gen_meb(4, 2, seed=1),
        gen_sqrt_lasso(5, 7, seed=2),
        gen_maxcut_sdp(4, seed=3),
        gen_random_lp(4, 9, seed=4),
        gen_random_lp(6, 12, seed=5, basic=3),
    ]


# -- NALP -------------------------------------------------------------------


def test_minimal_file_round_trip():
    p = parse_nalp(MINIMAL)
    assert p.m == 1 and p.n == 1
    assert p.b.tolist() == [1.0] and p.c.tolist() == [1.0]
    assert write_nalp(p) == MINIMAL
    assert parse_nalp(write_nalp(p)).same_data(p)


@pytest.mark.parametrize("prob", all_generated(), ids=lambda p: p.name)
def test_round_trip_generated(prob, tmp_path):
    back = parse_nalp(write_nalp(prob))
    assert back.same_data(prob)
    assert back.name == prob.name
    save_nalp(prob, tmp_path / "p.nalp")
    assert read_nalp(tmp_path / "p.nalp").same_data(prob)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_round_trip_preserves_bits(seed):
    rng = np.random.default_rng(seed)
    prob = random_problem(MIXED, 3, rng)
    # awkward magnitudes that need the shortest round-trip repr
    prob = Problem(prob.A, prob.b * 10.0 ** rng.integers(-300, 300), prob.c / 3, MIXED)
    back = parse_nalp(write_nalp(prob))
    assert back.same_data(prob)


def test_soc_size_one_rejected():
    bad = MINIMAL.replace("NN 1", "SOC 1")
    with pytest.raises(ParseError, match="SOC n ≥ 2") as info:
        parse_nalp(bad)
    assert (info.value.line, info.value.column) == (3, 1)


def test_duplicate_triplets_summed():
    text = MINIMAL.replace("A 1\n0 0 1.0", "A 2\n0 0 1.0\n0 0 1.0")
    p = parse_nalp(text)
    assert p.A.T.toarray()[0, 0] == 2.0
    r, c, v = p.A.triplets()
    assert list(v) == [2.0]


@pytest.mark.parametrize(
    "old,new,line,col,msg",
    [
        ("NALP 1", "NALP 2", 1, 6, "version"),
        ("DIMS 1 1", "DIMS 1 2", 4, 6, "nvec"),
        ("0 0 1.0", "0 3 1.0", 6, 1, "column index 3"),
        ("0 0 1.0", "0 0 abc", 6, 5, "expected number"),
        ("C 1\n1.0\nEND", "C 1\n1.0\n", 11, 1, "'END'"),
        ("NN 1", "XX 1", 3, 1, "cone type"),
    ],
)
def test_parse_errors_point_at_the_token(old, new, line, col, msg):
    with pytest.raises(ParseError, match=msg) as info:
        parse_nalp(MINIMAL.replace(old, new))
    assert (info.value.line, info.value.column) == (line, col)


def test_comments_name_and_trailing_tokens():
    text = "# name: tiny lp\n" + MINIMAL.replace("B 1", "B 1  # right-hand side")
    assert parse_nalp(text).name == "tiny lp"
    with pytest.raises(ParseError, match="after END"):
        parse_nalp(MINIMAL + "junk\n")


def test_psd_blocks_use_svec_coordinates():
    cone = ConeDesc([Psd(2)])
    A = LinearMap(1, [0, 0], [0, 2], [1.0, 1.0], cone)
    p = Problem(A, [1.0], [1.0, np.sqrt(2) * 0.5, 2.0], cone)
    back = parse_nalp(write_nalp(p))
    np.testing.assert_array_equal(smat(back.c), [[1.0, 0.5], [0.5, 2.0]])


# -- MPS --------------------------------------------------------------------

TWO_VAR = """NAME          TWOVAR
ROWS
 N  obj
 E  c1
COLUMNS
    x1  obj  1.0  c1  1.0
    x2  c1   1.0
RHS
    rhs c1   1.0
ENDATA
"""


def test_mps_two_variable_example():
    p = parse_mps_lp(TWO_VAR)
    assert p.m == 1 and p.n == 2 and p.name == "TWOVAR"
    res = solve(p)
    assert res.status == OPTIMAL
    assert res.objective_primal == pytest.approx(0.0, abs=1e-5)


def test_mps_l_row_gets_one_slack():
    text = TWO_VAR.replace(" E  c1", " L  c1").replace("c1   1.0\nRHS", "c1   1.0\nRHS").replace(
        "rhs c1   1.0", "rhs c1   4.0")
    p = parse_mps_lp(text)
    assert p.n == 3
    np.testing.assert_array_equal(p.A.T.toarray(), [[1.0, 1.0, 1.0]])
    g = parse_mps_lp(text.replace(" L  c1", " G  c1"))
    np.testing.assert_array_equal(g.A.T.toarray(), [[1.0, 1.0, -1.0]])


def test_toy_afiro_matches_vertex_oracle():
    p = read_mps(DATA / "toy_afiro.mps")
    assert p.name == "TOYAFIRO"
    res = solve(p)
    assert res.status == OPTIMAL
    obj = res.objective_primal + p.metadata["objective_constant"]
    # brute-force vertex enumeration on the original bounded form
    assert obj == pytest.approx(-9.0, abs=1e-5)
    x = recover_mps_solution(p, res.x)
    assert 0 <= x["X2"] <= 3 + 1e-6 and x["X3"] >= 1 - 1e-6 and x["X5"] <= 2 + 1e-6
    assert x["X2"] + x["X4"] - x["X5"] == pytest.approx(1.0, abs=1e-5)
    cost = -2 * x["X1"] - 3 * x["X2"] + x["X3"] + 0.5 * x["X4"] - x["X5"] + 5
    assert cost == pytest.approx(obj, abs=1e-5)


def test_mps_free_and_fixed_formats_agree():
    fixed = (DATA / "toy_afiro.mps").read_text()
    free = re.sub(r" +", " ", fixed)
    a, b = parse_mps_lp(fixed), parse_mps_lp(free)
    assert a.same_data(b)


def test_mps_fixed_names_with_blanks():
    text = (
        "NAME          BLANKS\n"
        "ROWS\n"
        " N  COST\n"
        " E  ROW A\n"
        "COLUMNS\n"
        "    X ONE     COST               1.0   ROW A              1.0\n"
        "    X TWO     ROW A              1.0\n"
        "RHS\n"
        "    RHS       ROW A              2.0\n"
        "ENDATA\n"
    )
    p = parse_mps_lp(text)
    assert p.metadata["mps_rows"] == ["ROW A"]
    assert [c[0] for c in p.metadata["mps_columns"]] == ["X ONE", "X TWO"]
    np.testing.assert_array_equal(p.b, [2.0])


def test_mps_bound_conversions():
    text = """NAME B
ROWS
 N obj
 E r
COLUMNS
 a obj 1 r 1
 b obj 1 r 1
 c obj 1 r 1
 d obj 1 r 1
RHS
 rhs r 10 obj 3
BOUNDS
 LO bnd a 2
 UP bnd a 5
 FX bnd b 1
 FR bnd c
 MI bnd d
 UP bnd d 4
ENDATA
"""
    p = parse_mps_lp(text)
    kinds = {name: kind for name, kind, _, _ in p.metadata["mps_columns"]}
    assert kinds == {"a": "shift", "b": "fixed", "c": "split", "d": "reflect"}
    assert p.metadata["mps_bound_rows"] == 1
    # a = 2 + a', b = 1, d = 4 - d': rhs 10 - 2 - 1 - 4 = 3; constant -3 + 2 + 1 + 4
    assert p.b[0] == 3.0
    assert p.metadata["objective_constant"] == pytest.approx(4.0)
    assert p.b[1] == 3.0


def test_mps_ranges_unsupported():
    text = TWO_VAR.replace("ENDATA", "RANGES\n    rng c1 1.0\nENDATA")
    with pytest.raises(UnsupportedFeature, match="RANGES"):
        parse_mps_lp(text)


def test_mps_errors():
    with pytest.raises(ParseError, match="ENDATA"):
        parse_mps_lp(TWO_VAR.replace("ENDATA", ""))
    with pytest.raises(ParseError, match="unknown row"):
        parse_mps_lp(TWO_VAR.replace("x2  c1", "x2  c9"))
    with pytest.raises(UnsupportedFeature):
        parse_mps_lp(TWO_VAR.replace("ROWS", "OBJSENSE\n    MAX\nROWS"))


# -- generators -------------------------------------------------------------


def test_generator_determinism():
    for spec in [GeneratorSpec("meb", {"N": 5, "d": 3}, 11), GeneratorSpec("sqrt_lasso", {"m": 4, "n": 6}, 2),
                 GeneratorSpec("maxcut_sdp", {"p": 5}, 9), GeneratorSpec("random_lp", {"m": 3, "n": 7}, 1)]:
        a, b = spec.build(), spec.build()
        assert a.same_data(b)
        assert write_nalp(a) == write_nalp(b)
    assert not gen_meb(5, 3, seed=1).same_data(gen_meb(5, 3, seed=2))
    with pytest.raises(ValueError):
        GeneratorSpec("sdplib")


@pytest.mark.parametrize("prob", all_generated(), ids=lambda p: p.name)
def test_generated_problems_validate(prob):
    prob.validate()
    assert np.all(np.isfinite(prob.c))


def test_meb_shapes():
    p = gen_meb(3, 2, seed=0)
    assert p.m == 9
    assert p.cone == ConeDesc([Orthant(5), SecondOrder(3), SecondOrder(3), SecondOrder(3)])
    pts = meb_points(p)
    assert pts.shape == (3, 2) and np.all(np.abs(pts) <= 1)


def test_meb_single_point():
    p = gen_meb(1, 3, seed=4)
    res = solve(p)
    center, radius = meb_center_radius(p, res.x)
    assert res.status == OPTIMAL
    assert radius == pytest.approx(0.0, abs=1e-5)
    np.testing.assert_allclose(center, meb_points(p)[0], atol=1e-5)


def test_meb_against_minimax_oracle():
    p = gen_meb(20, 3, seed=7)
    res = solve(p)
    center, radius = meb_center_radius(p, res.x)
    assert res.status == OPTIMAL
    far = np.max(np.linalg.norm(meb_points(p) - center, axis=1))
    assert radius >= far - 1e-6
    # frozen from SLSQP on the epigraph form, best of three starts
    assert radius == pytest.approx(1.1931902915581947, abs=1e-4)


def test_lasso_exact_residual():
    p = gen_sqrt_lasso(1, 1, lam_reg=0.0, data=([[1.0]], [2.0]))
    res = solve(p)
    assert res.status == OPTIMAL
    assert res.x[2] == pytest.approx(0.0, abs=1e-5)
    assert lasso_coefficients(p, res.x)[0] == pytest.approx(2.0, abs=1e-4)


def test_lasso_against_subgradient_oracle():
    p = gen_sqrt_lasso(10, 20, seed=3)
    res = solve(p)
    assert res.status == OPTIMAL
    # best value of 4e5 diminishing-step subgradient iterations
    assert res.objective_primal == pytest.approx(0.4920206640713972, abs=1e-3)
    D = -p.A.T.toarray()[:, :20]
    x = lasso_coefficients(p, res.x)
    direct = np.linalg.norm(D @ x + p.b) + np.abs(x).sum()
    assert direct == pytest.approx(res.objective_primal, abs=1e-4)


def test_lasso_layout():
    p = gen_sqrt_lasso(3, 4, lam_reg=0.5, seed=0)
    assert p.cone == ConeDesc([Orthant(8), SecondOrder(4)])
    np.testing.assert_array_equal(p.c[:8], 0.5)
    assert p.c[8] == 1.0 and np.all(p.c[9:] == 0)


def test_maxcut_single_edge():
    p = gen_maxcut_sdp(2, adjacency=[[0.0, 1.0], [1.0, 0.0]])
    res = solve(p)
    assert res.status == OPTIMAL
    assert res.objective_primal == pytest.approx(-1.0, abs=1e-4)
    X = smat(res.x)
    np.testing.assert_allclose(np.diag(X), 1.0, atol=1e-6)
    assert X[0, 1] == pytest.approx(-1.0, abs=1e-3)


def test_maxcut_2x2_brute_force():
    """Over X = [[1, t], [t, 1]], <-L/4, X> = (t - 1) / 2 is least at t = -1."""
    p = gen_maxcut_sdp(2, adjacency=[[0.0, 1.0], [1.0, 0.0]])
    C = smat(p.c)
    vals = [np.sum(C * np.array([[1.0, t], [t, 1.0]])) for t in np.linspace(-1, 1, 201)]
    assert min(vals) == pytest.approx(-1.0, abs=1e-12)


@pytest.mark.parametrize("seed,best_cut", [(0, 4), (1, 6), (2, 5), (3, 7), (4, 5)])
def test_maxcut_relaxation_bounds_true_cut(seed, best_cut):
    W = random_graph(6, seed)
    cuts = []
    for signs in itertools.product((-1.0, 1.0), repeat=6):
        v = np.array(signs)
        cuts.append(0.25 * np.sum(W * (1 - np.outer(v, v))))
    assert max(cuts) == best_cut
    res = solve(gen_maxcut_sdp(6, seed))
    assert res.status == OPTIMAL
    # the relaxation is tight on some of these graphs, so allow the solver accuracy
    assert -res.objective_primal >= best_cut - 1e-4
    # stopping test bounds |diag X - 1| / (1 + |b|) by tol
    np.testing.assert_allclose(np.diag(smat(res.x)), 1.0, atol=1e-6 * (1 + np.sqrt(6)))


def test_random_lp_planted_pair():
    p = gen_random_lp(10, 30, seed=1)
    md = p.metadata
    T = p.A.T.toarray()
    assert np.linalg.norm(T @ md["x0"] - p.b) == 0.0
    assert np.linalg.norm(T.T @ md["lam0"] + md["s0"] - p.c) == 0.0
    assert np.all((md["x0"] >= 0.5) & (md["x0"] <= 1.5))
    assert np.linalg.matrix_rank(T) == 10
    assert 0.15 < np.count_nonzero(T) / T.size < 0.45


def test_random_lp_gap():
    p = gen_random_lp(10, 30, seed=1)
    res = solve(p)
    assert res.status == OPTIMAL
    assert abs(p.c @ res.x - p.b @ res.lam) <= 1e-5


def test_random_lp_vertex_oracle():
    res = solve(gen_random_lp(10, 20, seed=1))
    # frozen from enumerating all 10-column bases
    assert res.objective_primal == pytest.approx(3.0491703270814736, abs=1e-5)


def test_random_lp_degenerate_variant():
    p = gen_random_lp(20, 60, seed=2, basic=10)
    md = p.metadata
    assert np.count_nonzero(md["x0"]) == 10
    assert np.all(md["x0"] * md["s0"] == 0) and np.all(md["x0"] + md["s0"] > 0)
    res = solve(p)
    assert res.objective_primal == pytest.approx(p.c @ md["x0"], abs=1e-5)
    with pytest.raises(ValueError):
        gen_random_lp(5, 10, basic=5)
