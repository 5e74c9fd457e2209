import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from conftest import random_instance
from geomreg.errors import ConvergenceError, DomainError, NotApplicableError, SingularPointError
from geomreg.geomfix import (
    apply_A_eps,
    attractivity_check,
    closed_form_fixed_point,
    covariance_consistency_check,
    error_decomposition,
    fixed_point_modes,
    geometric_mean_value_and_grad,
    iterate_fixed_point,
    jacobian_A_eps,
    spectral_norm,
    tangency_check,
    tangency_cosine,
)
from geomreg.linalg import pseudo_solve, svd
from geomreg.problem import SimulationConfig, simulate

P_FIXTURE = ((3 + np.sqrt(8)) / 2, (4 + np.sqrt(15)) / 2)


def central_jacobian(f, w, h):
    cols = []
    for j in range(w.shape[0]):
        e = np.zeros_like(w)
        e[j] = h
        cols.append((f(w + e) - f(w - e)) / (2 * h))
    return np.column_stack(cols)


# A_eps


def test_apply_A_eps_matches_dense_solve(diag21):
    S, y = diag21
    np.testing.assert_allclose(apply_A_eps(S, y, 1.0, np.array([1.0, 1.0])), [8 / 5, 3 / 2], rtol=1e-15)


def test_apply_A_eps_zero_is_fixed(diag21):
    S, y = diag21
    np.testing.assert_array_equal(apply_A_eps(S, y, 1.0, np.zeros(2)), [0.0, 0.0])


def test_apply_A_eps_small_eps_gives_pinv(diag21):
    S, y = diag21
    np.testing.assert_allclose(apply_A_eps(S, y, 1e-12, np.array([0.3, -2.0])), pseudo_solve(S, y), rtol=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_apply_A_eps_matches_regularized_dense_solve(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 30))
    F, y = random_instance(rng, n, n, cond=1e2)
    S = svd(F)
    w = rng.standard_normal(n)
    eps = 0.2
    t = S.V.T @ w
    # prior covariance V diag(t^2) V', so the penalty is eps^2 V diag(1/t^2) V'
    A = F.T @ F + eps**2 * (S.V / t**2) @ S.V.T
    x_dense = np.linalg.solve(A, F.T @ y)
    x = apply_A_eps(S, y, eps, w)
    assert np.linalg.norm(x - x_dense) <= 1e-8 * np.linalg.norm(x_dense)


def test_eps_must_be_positive(identity2):
    S, y = identity2
    for eps in (0.0, -1.0, np.nan, np.inf):
        with pytest.raises(DomainError):
            closed_form_fixed_point(S, y, eps)


# closed form


def test_closed_form_fixture(identity2):
    S, y = identity2
    fp = closed_form_fixed_point(S, y, 0.5)
    np.testing.assert_allclose(fp.p, P_FIXTURE, rtol=1e-15)
    assert fp.kept_indices == (0, 1)
    assert fp.iterations == 0
    assert fp.residual <= 1e-10 * (1 + np.linalg.norm(fp.p))
    assert fp.estimate.method == "geom_fixed_point" and fp.eps == 0.5


def test_closed_form_drops_small_mode():
    S = svd(np.eye(2))
    fp = closed_form_fixed_point(S, np.array([3.0, 0.5]), 1.0)
    np.testing.assert_allclose(fp.p, [(3 + np.sqrt(5)) / 2, 0.0], rtol=1e-15)
    assert fp.kept_indices == (0,)


def test_closed_form_agrees_with_iteration_oracle(identity2):
    S, y = identity2
    w = y.copy()
    for _ in range(200):
        w = apply_A_eps(S, y, 0.5, w)
    np.testing.assert_allclose(closed_form_fixed_point(S, y, 0.5).p, w, rtol=1e-12)


def test_closed_form_empty_kept_set(identity2):
    S, y = identity2
    fp = closed_form_fixed_point(S, y, 2.0)
    np.testing.assert_array_equal(fp.p, [0.0, 0.0])
    assert fp.kept_indices == ()
    assert fp.estimate.warnings


def test_threshold_tie_is_dropped():
    keep, s = fixed_point_modes(np.array([2.0, -2.0000001, 2.0000001]), 1.0)
    np.testing.assert_array_equal(keep, [False, True, True])
    assert s[0] == 0.0 and s[1] < 0 < s[2]


def test_threshold_root_without_cancellation():
    # just above 2 eps the discriminant is tiny; the root must still be ~eps
    _, s = fixed_point_modes(np.array([2.0 + 1e-12]), 1.0)
    assert s[0] == pytest.approx(1.0, abs=2e-6)
    assert s[0] ** 2 - (2.0 + 1e-12) * s[0] + 1.0 == pytest.approx(0.0, abs=1e-15)


instances = st.tuples(st.integers(0, 2**32 - 1), st.floats(0.01, 0.45))


@given(instances)
def test_fixed_point_properties(inst):
    seed, frac = inst
    F, y = random_instance(np.random.default_rng(seed))
    S = svd(F)
    b = S.data_coeffs(y)
    eps = frac * np.max(np.abs(b))
    fp = closed_form_fixed_point(S, y, eps)
    p = fp.p
    # A_eps[p] = p
    assert np.linalg.norm(apply_A_eps(S, y, eps, p) - p) <= 1e-10 * (1 + np.linalg.norm(p))
    s = S.sigma * S.source_coeffs(p)
    keep = np.zeros(S.rank, bool)
    keep[list(fp.kept_indices)] = True
    np.testing.assert_array_equal(keep, np.abs(b) > 2 * eps)
    # exact zeros in coefficient space; recomputing V'p only adds rounding
    assert np.all(np.abs(s[~keep]) <= 1e-12 * np.max(np.abs(b)))
    # quadratic root of matching sign and magnitude above |b|/2
    # s carries the rounding of V'p, about sigma_i ||p|| eps_mach
    ds = 64 * np.finfo(float).eps * S.sigma[keep] * np.linalg.norm(p)
    scale = b[keep] ** 2 + eps**2
    slack = 1e-12 * scale + ds * (np.abs(2 * s[keep]) + np.abs(b[keep]))
    assert np.all(np.abs(s[keep] ** 2 - b[keep] * s[keep] + eps**2) <= slack)
    assert np.all(np.sign(s[keep]) == np.sign(b[keep]))
    assert np.all(np.abs(s[keep]) > 0.5 * np.abs(b[keep]))


@given(instances, st.floats(-1e3, 1e3).filter(lambda c: abs(c) > 1e-3))
def test_scale_covariance(inst, c):
    seed, frac = inst
    F, y = random_instance(np.random.default_rng(seed), 12, 9)
    S = svd(F)
    eps = frac * np.max(np.abs(S.data_coeffs(y)))
    p = closed_form_fixed_point(S, y, eps).p
    pc = closed_form_fixed_point(S, c * y, abs(c) * eps).p
    assert np.linalg.norm(pc - c * p) <= 1e-12 * abs(c) * (1 + np.linalg.norm(p))


# iteration


def test_iteration_from_data_matches_closed_form(identity2):
    S, y = identity2
    fp = iterate_fixed_point(S, y, 0.5, w0=y)
    np.testing.assert_allclose(fp.p, P_FIXTURE, atol=1e-10)
    assert fp.iterations > 1


def test_iteration_from_zero_stays_at_zero(identity2):
    S, y = identity2
    fp = iterate_fixed_point(S, y, 0.5, w0=np.zeros(2))
    np.testing.assert_array_equal(fp.p, [0.0, 0.0])
    assert fp.iterations == 1


def test_iteration_large_eps_goes_to_zero(identity2):
    S, y = identity2
    fp = iterate_fixed_point(S, y, 1e6)
    assert np.linalg.norm(fp.p) < 1e-9


def test_iteration_reports_non_convergence(identity2):
    S, y = identity2
    with pytest.raises(ConvergenceError) as info:
        iterate_fixed_point(S, y, 0.5, max_iter=2)
    assert info.value.iterations == 2
    assert info.value.last_iterate.shape == (2,)


def test_iteration_validates_arguments(identity2):
    S, y = identity2
    with pytest.raises(DomainError):
        iterate_fixed_point(S, y, 0.5, tol=0.0)
    with pytest.raises(DomainError):
        iterate_fixed_point(S, y, 0.5, max_iter=0)


# Jacobian and attractivity


def test_jacobian_at_zero_vanishes(identity2):
    S, y = identity2
    np.testing.assert_array_equal(jacobian_A_eps(S, y, 0.5, np.zeros(2)), np.zeros((2, 2)))


def test_jacobian_scalar():
    S = svd(np.eye(1))
    J = jacobian_A_eps(S, np.array([3.0]), 0.5, np.array([2.0]))
    assert J[0, 0] == pytest.approx(2 * 0.25 * 2 * 3 / 4.25**2, rel=1e-14)
    assert J[0, 0] == pytest.approx(0.16609, abs=1e-5)


@pytest.mark.parametrize("seed", range(8))
def test_jacobian_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    F, y = random_instance(rng, 8, 6, cond=10.0)
    S = svd(F)
    w = rng.standard_normal(6)
    eps = 0.3
    J = jacobian_A_eps(S, y, eps, w)
    np.testing.assert_array_equal(J, J.T)
    h = 1e-6 * (1 + np.linalg.norm(w))
    J_fd = central_jacobian(lambda v: apply_A_eps(S, y, eps, v), w, h)
    assert np.linalg.norm(J - J_fd) <= 1e-6 * np.linalg.norm(J)


def test_spectral_norm_power_iteration():
    A = np.diag([0.5, -0.9, 0.1])
    assert spectral_norm(A) == pytest.approx(0.9, rel=1e-9)
    assert spectral_norm(np.zeros((3, 3))) == 0.0


def test_attractivity_strong_signal():
    S = svd(np.diag([1.0, 0.5, 0.25]))
    y = np.array([2.0, -1.5, 1.0])
    r = attractivity_check(S, y, 0.2)
    assert r.all_sufficient_margin and all(r.strict_inequality)
    assert r.spectral_norm < 1 and r.attracting and not r.empty


def test_attractivity_intermediate_band_reported():
    S = svd(np.eye(2))
    y = np.array([3.0, 1.5])
    r = attractivity_check(S, y, 0.5)
    assert r.sufficient_margin == [True, False]
    assert r.kept_indices == [0, 1]
    assert 0 <= r.spectral_norm


def test_attractivity_empty():
    S = svd(np.eye(2))
    r = attractivity_check(S, np.array([0.1, 0.1]), 1.0)
    assert r.empty and r.attracting and r.kept_indices == []


@given(instances)
def test_canonical_fixed_point_is_attracting(inst):
    seed, frac = inst
    F, y = random_instance(np.random.default_rng(seed), 10, 10)
    S = svd(F)
    eps = frac * np.max(np.abs(S.data_coeffs(y)))
    r = attractivity_check(S, y, eps)
    b = np.asarray(r.data_coeffs)
    d = np.asarray(r.mode_derivatives)
    # per-mode derivative at the larger root is 2 eps^2 / (b s), below 1 whenever |b| > 2 eps
    if not r.empty:
        _, s = fixed_point_modes(b, eps)
        np.testing.assert_allclose(d, 2 * eps**2 / (b * s), rtol=1e-9)
        assert np.all((0 < d) & (d < 1))
    assert r.attracting


# geometric mean


def test_geometric_mean_examples():
    g, grad = geometric_mean_value_and_grad(np.array([2.0, 3.0]))
    assert g == 6.0
    np.testing.assert_array_equal(grad, [3.0, 2.0])
    g, grad = geometric_mean_value_and_grad(np.ones(7))
    assert g == 1.0
    np.testing.assert_array_equal(grad, np.ones(7))


def test_geometric_mean_signs_and_zero():
    g, grad = geometric_mean_value_and_grad(np.array([-2.0, 3.0]))
    assert g == 6.0
    np.testing.assert_array_equal(grad, [-3.0, 2.0])
    with pytest.raises(SingularPointError):
        geometric_mean_value_and_grad(np.array([1.0, 0.0]))


zero_free = st.lists(
    st.floats(0.1, 10.0) | st.floats(-10.0, -0.1), min_size=1, max_size=12
).map(np.array)


@given(zero_free)
def test_geometric_mean_gradient_identities(z):
    g, grad = geometric_mean_value_and_grad(z)
    np.testing.assert_allclose(grad @ z, z.size * g, rtol=1e-12)
    np.testing.assert_allclose(grad, g / z, rtol=1e-12)
    h = 1e-6 * (1 + np.linalg.norm(z))

    def f(v):
        return np.array([np.prod(np.abs(v))])

    fd = central_jacobian(f, z, h)[0]
    assert np.linalg.norm(fd - grad) <= 1e-6 * np.linalg.norm(grad)


# tangency and covariance


def test_tangency_fixture(identity2):
    S, y = identity2
    r = tangency_check(S, y, 0.5)
    assert abs(r.abs_cos - 1.0) <= 1e-10 and r.sign == -1 and r.tangent
    assert r.perturbed_abs_cos < 1 - 1e-4 and r.perturbation_breaks


def test_tangency_random_10x10():
    F, y = random_instance(np.random.default_rng(10), 10, 10)
    S = svd(F)
    eps = 0.1 * np.max(np.abs(S.data_coeffs(y))) / 2
    r = tangency_check(S, y, eps)
    assert r.tangent and r.perturbation_breaks


def test_tangency_needs_kept_modes(identity2):
    S, y = identity2
    with pytest.raises(NotApplicableError):
        tangency_check(S, y, 10.0)


def test_tangency_single_mode_has_no_negative_control():
    S = svd(np.eye(2))
    r = tangency_check(S, np.array([3.0, 0.1]), 0.5)
    assert r.tangent and r.perturbed_abs_cos is None


def test_tangency_cosine_detects_non_critical_point():
    sigma = np.ones(2)
    b = np.array([3.0, 4.0])
    assert abs(tangency_cosine(sigma, b, np.array([1.0, 3.0]))) < 0.99


def test_covariance_fixture(identity2):
    S, y = identity2
    r = covariance_consistency_check(S, y, 0.5)
    assert r.max_deviation <= 1e-12 and r.consistent


def test_covariance_zero_fixed_point(identity2):
    S, y = identity2
    r = covariance_consistency_check(S, y, 100.0)
    assert r.max_deviation == 0.0 and r.consistent


@given(instances)
def test_covariance_consistency_random(inst):
    seed, frac = inst
    F, y = random_instance(np.random.default_rng(seed))
    S = svd(F)
    r = covariance_consistency_check(S, y, frac * np.max(np.abs(S.data_coeffs(y))))
    assert r.consistent


# error decomposition


def test_error_decomposition_exact_data():
    rng = np.random.default_rng(4)
    F, _ = random_instance(rng, 15, 15, cond=10.0)
    x = rng.standard_normal(15)
    d = error_decomposition(svd(F), F @ x, 1e-9, x)
    assert d.truncation_norm <= 1e-12
    assert d.data_misfit_norm <= 1e-12
    assert d.shrinkage_norm <= 1e-7
    assert d.actual_error <= d.total_bound + 1e-10


def test_error_decomposition_everything_dropped():
    rng = np.random.default_rng(5)
    F, y = random_instance(rng, 10, 10)
    x = rng.standard_normal(10)
    S = svd(F)
    d = error_decomposition(S, y, 1e6, x)
    assert d.truncation_norm == pytest.approx(np.linalg.norm(x), rel=1e-14)
    assert d.data_misfit_norm == 0.0 and d.shrinkage_norm == 0.0


def test_error_decomposition_includes_null_space():
    # rank-1 operator: the null-space part of x_true counts as truncation
    F = np.array([[1.0, 0.0], [0.0, 0.0]])
    x = np.array([1.0, 2.0])
    d = error_decomposition(svd(F), F @ x, 1e-3, x)
    assert d.truncation_norm == pytest.approx(2.0)
    assert d.identity_residual <= 1e-14


def test_error_decomposition_default_problem():
    P = simulate(SimulationConfig())
    S = svd(P.F)
    for eps in (P.delta, 10 * P.delta, 1e-2 * P.delta):
        d = error_decomposition(S, P.y, eps, P.x_true)
        assert d.actual_error <= d.total_bound + 1e-10
        assert d.actual_error == pytest.approx(np.linalg.norm(P.x_true - closed_form_fixed_point(S, P.y, eps).p))


@given(instances)
def test_error_decomposition_triangle_bound(inst):
    seed, frac = inst
    rng = np.random.default_rng(seed)
    F, y = random_instance(rng)
    x = rng.standard_normal(F.shape[1])
    S = svd(F)
    d = error_decomposition(S, y, frac * np.max(np.abs(S.data_coeffs(y))), x)
    assume(np.isfinite(d.total_bound))
    assert d.actual_error <= d.total_bound + 1e-10
    assert d.total_bound == pytest.approx(d.truncation_norm + d.data_misfit_norm + d.shrinkage_norm)
