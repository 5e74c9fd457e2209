import warnings

import numpy as np
import pytest

from geomreg.errors import DomainError
from geomreg.lcurve import (
    LCurve,
    LowCurvatureWarning,
    corner_curvature,
    lcurve_corner,
    lcurve_generate,
    parameter_grid,
)
from geomreg.linalg import svd
from geomreg.problem import SimulationConfig, simulate


@pytest.fixture(scope="module")
def default_problem():
    P = simulate(SimulationConfig())
    return P, svd(P.F)


def test_tikhonov_identity_is_monotone():
    S = svd(np.eye(4))
    y = np.array([1.0, -2.0, 0.5, 3.0])
    c = lcurve_generate(S, y, "tikhonov", decades=10, points=40)
    assert np.all(np.diff(c.residual_norms) >= 0)
    assert np.all(np.diff(c.solution_norms) <= 0)


def test_geom_flat_tail():
    S = svd(np.diag([2.0, 1.0, 0.5]))
    y = np.array([1.0, 2.0, -0.7])
    c = lcurve_generate(S, y, "geom", decades=6, points=20)
    # the last grid value is max|u_i'y|/2, where every mode is dropped
    assert c.params[-1] == pytest.approx(np.max(np.abs(S.data_coeffs(y))) / 2)
    assert c.solution_norms[-1] == 0.0
    assert c.residual_norms[-1] == pytest.approx(np.linalg.norm(y))


def test_grids():
    S = svd(np.diag([10.0, 0.1]))
    y = np.array([4.0, 1.0])
    g = parameter_grid(S, y, "tikhonov", 30, 31)
    assert np.log10(g[15]) == pytest.approx(0.0)
    assert np.log10(g[-1] / g[0]) == pytest.approx(30)
    e = parameter_grid(S, y, "geom", 30, 31)
    assert e[-1] == pytest.approx(2.0) and np.log10(e[-1] / e[0]) == pytest.approx(30)


@pytest.mark.parametrize(
    "kw", [dict(method="ridge"), dict(decades=0.0), dict(decades=-1.0), dict(points=2)]
)
def test_generate_validation(kw):
    S = svd(np.eye(2))
    args = dict(method="tikhonov", decades=10.0, points=10) | kw
    with pytest.raises(DomainError):
        lcurve_generate(S, np.ones(2), **args)


def test_zero_data_rejected():
    with pytest.raises(DomainError):
        lcurve_generate(svd(np.eye(2)), np.zeros(2), "geom")


def test_lcurve_type_validation():
    with pytest.raises(DomainError):
        LCurve("tikhonov", np.array([1.0, 2.0]), np.ones(2), np.ones(2))
    with pytest.raises(DomainError):
        LCurve("tikhonov", np.array([1.0, 3.0, 2.0]), np.ones(3), np.ones(3))


def polyline_curve(x, y):
    return LCurve("tikhonov", np.arange(1.0, len(x) + 1), 10.0 ** np.asarray(x), 10.0 ** np.asarray(y))


def test_right_angle_corner():
    # vertical leg down to the vertex (0, 0) at index k, then horizontal leg
    k = 10
    x = np.concatenate([np.zeros(k), [0.0], np.linspace(0, 1, k + 1)[1:]])
    y = np.concatenate([np.linspace(1, 0, k + 1)[:-1], [0.0], np.zeros(k)])
    c = polyline_curve(x, y)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert lcurve_corner(c) == k


def test_straight_line_warns():
    t = np.linspace(0, 1, 30)
    c = polyline_curve(t, -2 * t)
    with pytest.warns(LowCurvatureWarning):
        idx = lcurve_corner(c)
    assert 0 <= idx < 30


def test_corner_needs_five_points():
    t = np.linspace(0, 1, 4)
    with pytest.raises(DomainError):
        lcurve_corner(polyline_curve(t, -t))


def test_few_points_report_midpoint():
    c = lcurve_generate(svd(np.eye(3)), np.ones(3), "tikhonov", decades=4, points=3)
    assert c.corner_index == 1 and c.warnings


def test_curvature_excludes_floored_and_end_points():
    res = np.array([1e-2, 1e-2, 2e-2, 1e-1, 1.0, 1.0])
    sol = np.array([1e2, 1e1, 1.0, 0.9, 0.5, 0.0])
    k = corner_curvature(res, sol)
    assert k[-1] == -np.inf and k[0] == -np.inf
    assert np.any(np.isfinite(k))


def test_corner_ties_go_to_larger_parameter():
    from geomreg.lcurve import _select_corner

    idx, _ = _select_corner(np.array([-np.inf, 2.0, 1.0, 2.0, -np.inf]))
    assert idx == 3


def test_default_problem_corner_near_error_optimum(default_problem):
    P, S = default_problem
    for method in ("tikhonov", "geom"):
        c = lcurve_generate(S, P.y, method, 30, 100, x_true=P.x_true)
        best = int(np.argmin(c.error_norms))
        decades = abs(np.log10(c.params[c.corner_index] / c.params[best]))
        assert decades <= 1.0, (method, decades)


def test_default_problem_tikhonov_corner_residual(default_problem):
    P, S = default_problem
    c = lcurve_generate(S, P.y, "tikhonov")
    r = c.residual_norms[c.corner_index]
    assert P.delta / 3 <= r <= 3 * P.delta


def test_corner_stable_when_points_double(default_problem):
    P, S = default_problem
    for method in ("tikhonov", "geom"):
        c1 = lcurve_generate(S, P.y, method, 30, 100)
        c2 = lcurve_generate(S, P.y, method, 30, 200)
        step = np.log10(c1.params[1] / c1.params[0])
        assert abs(np.log10(c2.corner_param / c1.corner_param)) < step


def test_error_norms_match_direct_solves(default_problem):
    from geomreg.geomfix import closed_form_fixed_point
    from geomreg.regularizers import tikhonov_solve

    P, S = default_problem
    t = lcurve_generate(S, P.y, "tikhonov", 30, 12, x_true=P.x_true)
    g = lcurve_generate(S, P.y, "geom", 30, 12, x_true=P.x_true)
    for i in (0, 5, 11):
        xt = tikhonov_solve(S, P.y, t.params[i]).x
        xg = closed_form_fixed_point(S, P.y, g.params[i]).p
        assert t.error_norms[i] == pytest.approx(np.linalg.norm(P.x_true - xt), rel=1e-8)
        assert g.error_norms[i] == pytest.approx(np.linalg.norm(P.x_true - xg), rel=1e-8)
        # direct recomputation loses ~||F|| ||x|| eps when x is huge
        floor = 100 * np.finfo(float).eps * S.sigma[0] * np.linalg.norm(xt)
        assert t.residual_norms[i] == pytest.approx(np.linalg.norm(P.y - P.F @ xt), rel=1e-8, abs=floor)
        assert g.solution_norms[i] == pytest.approx(np.linalg.norm(xg), rel=1e-8, abs=1e-300)


def test_write_read_round_trip(tmp_path, default_problem):
    P, S = default_problem
    c = lcurve_generate(S, P.y, "geom", 20, 40)
    csv_path, json_path = c.write(tmp_path / "lc.csv")
    assert csv_path.read_text().splitlines()[0] == "param,residual_norm,solution_norm"
    back = LCurve.read(csv_path)
    np.testing.assert_array_equal(back.params, c.params)
    np.testing.assert_array_equal(back.residual_norms, c.residual_norms)
    np.testing.assert_array_equal(back.solution_norms, c.solution_norms)
    assert back.corner_index == c.corner_index and back.method == "geom"
