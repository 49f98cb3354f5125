import numpy as np
import pytest

from strathardy import (
    HalfSpace,
    Polynomial,
    ScalarField,
    abelian_group,
    angle_function_many,
    angle_gradient_many,
    apply_field,
    apply_field_to_polynomial,
    boundary_distance,
    distance_field,
    distance_flux_parts,
    field_pairings,
    group_from_table,
    halfspace_preset,
    heisenberg_group,
    horizontal_from_euclidean,
    horizontal_gradient_many,
    identity_Xi_pairing_many,
    orthogonality_identity,
    orthogonality_identity_many,
    p_sub_laplacian,
    p_sub_laplacian_distance_many,
    p_sub_laplacian_fd_many,
    pairing_polynomials,
    sub_laplacian_distance_polynomial,
)


def random_unit(rng, dim, tilt=True):
    nu = rng.normal(size=dim)
    if tilt and abs(nu[-1]) < 0.3:
        nu[-1] = 0.5 * np.sign(nu[-1] or 1.0)
    return nu / np.linalg.norm(nu)


@pytest.fixture
def skew_table():
    # Table chosen so the flux parts are nonzero: the first field's t-slot
    # coefficient depends on its own first-stratum variable.
    return group_from_table(
        name="skew",
        strata_dims=(2, 1),
        table={(0, 2): "x1"},
    )


class TestHalfSpace:
    def test_normalizes(self):
        hs = HalfSpace(nu=np.array([3.0, 4.0, 0.0]), d=1.0)
        assert np.allclose(hs.nu, [0.6, 0.8, 0.0])
        assert np.isclose(np.linalg.norm(hs.nu), 1.0)
        assert hs.d == 1.0

    def test_distance_and_contains(self):
        hs = halfspace_preset(3, "x1-axis", 2.0)
        pts = np.array([[3.0, 9.0, 9.0], [1.0, 0.0, 0.0]])
        assert np.array_equal(hs.distance(pts), [1.0, -1.0])
        assert np.array_equal(hs.contains(pts), [True, False])
        assert boundary_distance(hs, [5.0, 0.0, 0.0]) == 3.0

    def test_rejects_zero_normal(self):
        with pytest.raises(ValueError):
            HalfSpace(nu=np.zeros(3), d=0.0)

    def test_preset_accepts_spec(self, h1):
        hs = halfspace_preset(h1, "t-axis")
        assert np.array_equal(hs.nu, [0.0, 0.0, 1.0])

    def test_preset_rejects_unknown(self):
        with pytest.raises(ValueError):
            halfspace_preset(3, "z-axis")


class TestScalarField:
    def test_values_and_value(self):
        f = ScalarField(2, lambda pts: pts[:, 0] + 2 * pts[:, 1])
        assert f.value([1.0, 3.0]) == 7.0
        assert np.array_equal(f.values([[1.0, 0.0], [0.0, 1.0]]), [1.0, 2.0])

    def test_shape_validation(self):
        f = ScalarField(3, lambda pts: pts[:, 0])
        with pytest.raises(ValueError):
            f.values(np.zeros((4, 2)))

    def test_support_box_shape_validation(self):
        with pytest.raises(ValueError):
            ScalarField(3, lambda pts: pts[:, 0], support_box=np.zeros((2, 2)))

    def test_fd_gradient_second_order(self):
        f = ScalarField(2, lambda pts: np.exp(np.sin(pts[:, 0]) + pts[:, 1] ** 2))
        x = np.array([[0.4, -0.7]])
        exact = f.values(x) * np.array([np.cos(0.4), -1.4])
        err = [np.max(np.abs(f.gradients(x, h) - exact)) for h in (2e-2, 1e-2)]
        ratio = err[0] / err[1]
        assert 3.0 < ratio < 5.5

    def test_exact_gradient_preferred(self):
        calls = []
        f = ScalarField(
            2,
            lambda pts: pts[:, 0] ** 2,
            grad_fn=lambda pts: calls.append(1) or np.stack([2 * pts[:, 0], 0 * pts[:, 1]], axis=1),
        )
        assert f.has_exact_grad
        g = f.gradients(np.array([[3.0, 1.0]]))
        assert np.array_equal(g, [[6.0, 0.0]]) and calls

    def test_scaled(self):
        f = ScalarField(2, lambda pts: pts[:, 0], grad_fn=lambda pts: np.tile([1.0, 0.0], (len(pts), 1)))
        g = f.scaled(-3.0)
        pts = np.array([[2.0, 5.0]])
        assert g.values(pts)[0] == -6.0
        assert np.array_equal(g.gradients(pts), [[-3.0, 0.0]])


class TestPairings:
    def test_heisenberg_pairing_polynomials(self, h1, rng):
        nu = random_unit(rng, 3)
        hs = HalfSpace(nu=nu, d=0.0)
        px, py = pairing_polynomials(h1, hs)
        nu = hs.nu
        assert px == Polynomial(3, {(0, 0, 0): nu[0], (0, 1, 0): 2.0 * nu[2]})
        assert py == Polynomial(3, {(0, 0, 0): nu[1], (1, 0, 0): -2.0 * nu[2]})

    def test_field_pairings_match_polynomials(self, h2, rng):
        hs = HalfSpace(nu=random_unit(rng, 5), d=0.3)
        pts = rng.uniform(-2, 2, size=(30, 5))
        polys = pairing_polynomials(h2, hs)
        direct = field_pairings(h2, hs, pts)
        assert direct.shape == (30, 4)
        for k, p in enumerate(polys):
            assert np.array_equal(direct[:, k], p.eval_many(pts))

    def test_abelian_pairings_are_constants(self, r3, rng):
        hs = HalfSpace(nu=random_unit(rng, 3, tilt=False), d=0.0)
        for k, p in enumerate(pairing_polynomials(r3, hs)):
            assert p == Polynomial.constant(3, hs.nu[k])

    def test_fd_route_agrees(self, h2, rng):
        hs = HalfSpace(nu=random_unit(rng, 5), d=0.0)
        pts = rng.uniform(-2, 2, size=(50, 5))
        assert np.max(identity_Xi_pairing_many(h2, hs, pts)) < 1e-8

    def test_dimension_mismatch(self, h1):
        with pytest.raises(ValueError):
            pairing_polynomials(h1, halfspace_preset(5, "t-axis"))

    def test_mixed_derivatives_exact(self, h2):
        # Y_i <X_i, nu> = 2 nu_t and X_i <Y_i, nu> = -2 nu_t, all other
        # cross-applications vanish; exercised on the exact polynomial ring.
        hs = HalfSpace(nu=np.array([0.1, 0.2, 0.3, 0.4, 0.5]), d=0.0)
        polys = pairing_polynomials(h2, hs)
        nut = hs.nu[4]
        n = 2
        for i in range(n):
            for j in range(n):
                yj_pxi = apply_field_to_polynomial(h2, n + j, polys[i])
                xi_pyj = apply_field_to_polynomial(h2, i, polys[n + j])
                if i == j:
                    assert yj_pxi == Polynomial.constant(5, 2.0 * nut)
                    assert xi_pyj == Polynomial.constant(5, -2.0 * nut)
                else:
                    assert yj_pxi.is_zero and xi_pyj.is_zero
                assert apply_field_to_polynomial(h2, i, polys[i]).is_zero

    def test_horizontal_from_euclidean(self, h1, rng):
        pts = rng.uniform(-2, 2, size=(10, 3))
        grads = rng.normal(size=(10, 3))
        hor = horizontal_from_euclidean(h1, pts, grads)
        x, y = pts[:, 0], pts[:, 1]
        assert np.allclose(hor[:, 0], grads[:, 0] + 2 * y * grads[:, 2], rtol=1e-15)
        assert np.allclose(hor[:, 1], grads[:, 1] - 2 * x * grads[:, 2], rtol=1e-15)


class TestAngleFunction:
    def test_t_axis_closed_form(self, h1, t_axis, rng):
        pts = rng.uniform(-2, 2, size=(40, 3))
        w = angle_function_many(h1, t_axis, pts)
        ref = 4.0 * (pts[:, 0] ** 2 + pts[:, 1] ** 2)
        assert np.allclose(w**2, ref, rtol=1e-14)

    def test_x1_axis_is_one(self, h1, x1_axis, rng):
        pts = rng.uniform(-2, 2, size=(40, 3))
        assert np.all(angle_function_many(h1, x1_axis, pts) == 1.0)

    def test_abelian_is_one(self, r3, rng):
        hs = HalfSpace(nu=random_unit(rng, 3, tilt=False), d=0.0)
        pts = rng.uniform(-2, 2, size=(40, 3))
        assert np.max(np.abs(angle_function_many(r3, hs, pts) - 1.0)) < 1e-15

    def test_gradient_closed_form_vs_fd(self, h1, rng):
        hs = HalfSpace(nu=random_unit(rng, 3), d=0.0)
        pts = rng.uniform(0.5, 2.0, size=(30, 3))
        w = angle_function_many(h1, hs, pts)
        keep = w > 0.3
        pts = pts[keep]
        closed = angle_gradient_many(1, hs, pts)
        w_field = ScalarField(3, lambda q: angle_function_many(h1, hs, q))
        fd = horizontal_gradient_many(h1, w_field, pts)
        scale = 1.0 + np.max(np.abs(closed))
        assert np.max(np.abs(closed - fd)) < 1e-5 * scale

    def test_gradient_nan_where_angle_vanishes(self, h1, t_axis):
        out = angle_gradient_many(1, t_axis, np.array([[0.0, 0.0, 5.0]]))
        assert np.all(np.isnan(out))


class TestDistanceOperators:
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_distance_harmonic_on_heisenberg(self, rng, n):
        spec = heisenberg_group(n)
        hs = HalfSpace(nu=random_unit(rng, 2 * n + 1), d=0.2)
        assert sub_laplacian_distance_polynomial(spec, hs).is_zero

    def test_distance_harmonic_abelian(self, r3, rng):
        hs = HalfSpace(nu=random_unit(rng, 3, tilt=False), d=0.0)
        assert sub_laplacian_distance_polynomial(r3, hs).is_zero

    def test_flux_parts_vanish_on_heisenberg(self, h2, rng):
        hs = HalfSpace(nu=random_unit(rng, 5), d=-0.4)
        s1, s2 = distance_flux_parts(h2, hs)
        assert s1.is_zero and s2.is_zero

    def test_flux_parts_nonzero_on_skew_table(self, skew_table):
        hs = HalfSpace(nu=np.array([0.6, 0.0, 0.8]), d=0.0)
        s1, s2 = distance_flux_parts(skew_table, hs)
        nu = hs.nu
        # P1 = nu1 + nu3*x1, X1 P1 = nu3, so S1 = nu3 and S2 = nu3 * P1^2.
        assert s1 == Polynomial.constant(3, nu[2])
        p1 = Polynomial(3, {(0, 0, 0): nu[0], (1, 0, 0): nu[2]})
        assert s2 == p1 * p1 * nu[2]

    @pytest.mark.parametrize("p", [2.0, 2.5, 3.0, 4.0])
    def test_distance_p_harmonic_closed_form(self, h1, rng, p):
        hs = HalfSpace(nu=random_unit(rng, 3), d=0.0)
        pts = rng.uniform(0.5, 2.0, size=(25, 3))
        out = p_sub_laplacian_distance_many(h1, hs, pts, p)
        assert np.all(out[np.isfinite(out)] == 0.0)

    @pytest.mark.parametrize("p", [2.0, 3.0])
    def test_closed_form_matches_fd_on_skew_table(self, skew_table, p, rng):
        hs = HalfSpace(nu=np.array([0.6, 0.0, 0.8]), d=0.0)
        pts = rng.uniform(0.5, 1.5, size=(20, 3))
        closed = p_sub_laplacian_distance_many(skew_table, hs, pts, p)
        fd = p_sub_laplacian_fd_many(skew_table, distance_field(hs), pts, p)
        assert np.all(np.isfinite(closed))
        assert np.max(np.abs(closed - fd)) < 1e-5 * (1.0 + np.max(np.abs(closed)))

    def test_fd_route_near_zero_on_heisenberg(self, h1, t_axis, rng):
        pts = rng.uniform(0.5, 2.0, size=(15, 3))
        out = p_sub_laplacian_fd_many(h1, distance_field(t_axis), pts, 2.0)
        assert np.max(np.abs(out)) < 1e-6

    def test_rejects_small_p(self, h1, t_axis):
        with pytest.raises(ValueError):
            p_sub_laplacian_distance_many(h1, t_axis, np.zeros((1, 3)), 1.0)
        with pytest.raises(ValueError):
            p_sub_laplacian_fd_many(h1, distance_field(t_axis), np.zeros((1, 3)), 0.5)

    def test_singular_flux_is_nan_below_two(self, h1):
        flat = ScalarField(3, lambda pts: np.ones(len(pts)), grad_fn=lambda pts: np.zeros_like(pts))
        assert np.isnan(p_sub_laplacian(h1, flat, [1.0, 1.0, 1.0], 1.5))
        assert p_sub_laplacian(h1, flat, [1.0, 1.0, 1.0], 3.0) == 0.0

    def test_nan_where_angle_vanishes(self, h1, t_axis):
        out = p_sub_laplacian_distance_many(h1, t_axis, np.array([[0.0, 0.0, 1.0]]), 2.0)
        assert np.isnan(out[0])


class TestOrthogonality:
    def test_exact_zero(self, h1, rng):
        hs = HalfSpace(nu=random_unit(rng, 3), d=0.0)
        pts = rng.uniform(-2, 2, size=(200, 3))
        out = orthogonality_identity_many(1, hs, pts)
        finite = out[np.isfinite(out)]
        assert finite.size > 150
        assert np.all(finite == 0.0)

    def test_scalar_wrapper(self, h1):
        hs = HalfSpace(nu=np.array([0.3, -0.2, 0.9]), d=0.0)
        assert orthogonality_identity(1, hs, [0.7, -0.4, 1.1]) == 0.0

    def test_nan_where_angle_vanishes(self, t_axis):
        out = orthogonality_identity_many(1, t_axis, np.array([[0.0, 0.0, 3.0]]))
        assert np.isnan(out[0])

    def test_index_two(self, rng):
        hs = HalfSpace(nu=random_unit(rng, 5), d=0.0)
        pts = rng.uniform(-2, 2, size=(100, 5))
        out = orthogonality_identity_many(2, hs, pts)
        assert np.all(out[np.isfinite(out)] == 0.0)


class TestApplyField:
    def test_exact_gradient_route_matches_pairings(self, h1, rng):
        hs = HalfSpace(nu=random_unit(rng, 3), d=0.1)
        f = distance_field(hs)
        polys = pairing_polynomials(h1, hs)
        for _ in range(10):
            x = rng.uniform(-2, 2, size=3)
            for k in range(2):
                assert np.isclose(apply_field(h1, k, f, x), polys[k](x), rtol=1e-12, atol=1e-14)

    def test_fd_route_matches_polynomial_ring(self, h2, rng):
        g = Polynomial(5, {(1, 1, 0, 0, 1): 2.0, (0, 0, 2, 0, 0): -1.0, (0, 0, 0, 0, 2): 0.5})
        f = ScalarField(5, lambda pts: g.eval_many(pts))
        for _ in range(5):
            x = rng.uniform(-1.5, 1.5, size=5)
            for k in range(4):
                exact = apply_field_to_polynomial(h2, k, g)(x)
                assert abs(apply_field(h2, k, f, x) - exact) < 1e-5 * (1 + abs(exact))

    def test_index_out_of_range(self, h1):
        f = ScalarField(3, lambda pts: pts[:, 0])
        with pytest.raises(ValueError):
            apply_field(h1, 5, f, np.zeros(3))
