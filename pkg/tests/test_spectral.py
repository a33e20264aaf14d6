import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from telegraph.spectral import (
    Basis,
    BasisError,
    ConjugateSymmetryError,
    GridField,
    ParameterError,
    ProblemParams,
    ResolutionError,
    SpectralField,
    analyze,
    dt,
    dx,
    evaluate,
    inner,
    norm_U,
    norm_V,
    norm_W,
    norm_Z,
    random_field,
    sobolev_norm,
    synthesize,
    trace_x,
)


class TestProblemParams:
    def test_period(self):
        assert ProblemParams(omega=2 * np.pi, mu=1.0).period == pytest.approx(1.0)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"omega": 0.0, "mu": 1.0},
            {"omega": -1.0, "mu": 1.0},
            {"omega": 1.0, "mu": float("nan")},
            {"omega": 1.0, "mu": 1.0, "K": 0},
            {"omega": 1.0, "mu": 1.0, "N": -1},
            {"omega": 1.0, "mu": 1.0, "svd_tol": 0.0},
        ],
    )
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(ParameterError):
            ProblemParams(**kwargs)

    def test_replace_revalidates(self, small):
        assert small.replace(K=9).K == 9
        with pytest.raises(ParameterError):
            small.replace(omega=-2.0)


class TestSpectralField:
    def test_rejects_non_real_coefficients(self, small):
        c = np.zeros(small.shape, complex)
        c[small.K + 1, 1] = 1.0
        with pytest.raises(ConjugateSymmetryError):
            SpectralField(small, Basis.COSINE, c)

    def test_from_modes_completes_conjugates(self, small):
        f = SpectralField.from_modes(small, Basis.COSINE, {(2, 1): 1 + 2j})
        assert f.coeff(-2, 1) == 1 - 2j

    def test_from_modes_conflict(self, small):
        with pytest.raises(ConjugateSymmetryError):
            SpectralField.from_modes(small, Basis.COSINE, {(2, 1): 1.0, (-2, 1): 2.0})

    def test_sine_has_no_zero_mode(self, small):
        with pytest.raises((BasisError, ConjugateSymmetryError)):
            SpectralField.from_modes(small, Basis.SINE, {(0, 0): 1.0})

    def test_immutable(self, small):
        f = SpectralField.constant(small, 1.0)
        with pytest.raises((AttributeError, ValueError)):
            f.coeffs[0, 0] = 3.0

    def test_arithmetic(self, small, rng):
        a = random_field(small, Basis.COSINE, rng)
        b = random_field(small, Basis.COSINE, rng)
        np.testing.assert_allclose((a + b - b).coeffs, a.coeffs, atol=1e-15)
        np.testing.assert_allclose((a * 2.0 / 2.0).coeffs, a.coeffs)
        np.testing.assert_allclose((-a).coeffs, -a.coeffs)

    def test_mixed_basis_addition_rejected(self, small):
        with pytest.raises(BasisError):
            SpectralField.zeros(small, Basis.COSINE) + SpectralField.zeros(small, Basis.SINE)


class TestAnalyze:
    def test_constant(self):
        p = ProblemParams(omega=2 * np.pi, mu=1.0, K=4, N=4)
        f = analyze(GridField.from_function(p, lambda x, t: np.ones_like(x * t), 17, 16), Basis.COSINE)
        expected = np.zeros(p.shape)
        expected[p.K, 0] = 1.0
        np.testing.assert_allclose(f.coeffs, expected, atol=1e-14)

    def test_cos_omega_t(self):
        p = ProblemParams(omega=2 * np.pi, mu=1.0, K=4, N=4)
        g = GridField.from_function(p, lambda x, t: np.cos(p.omega * t) + 0 * x, 17, 16)
        f = analyze(g, Basis.COSINE)
        assert f.coeff(1, 0) == pytest.approx(0.5)
        assert f.coeff(-1, 0) == pytest.approx(0.5)
        assert f.max_abs() == pytest.approx(0.5)

    def test_sin_pi_x_against_quadrature(self):
        p = ProblemParams(omega=3.0, mu=1.0, K=3, N=5)
        f = analyze(GridField.from_function(p, lambda x, t: np.sin(np.pi * x) + 0 * t, 33, 16), Basis.SINE)
        # defining integral (2/T) int int g sin(pi x) e^{-i k omega t} at k = 0
        val, _ = integrate.dblquad(lambda x, t: np.sin(np.pi * x) ** 2, 0, p.period, 0, 1)
        assert f.coeff(0, 1) == pytest.approx(2 * val / p.period, abs=1e-12)
        assert abs(f.coeff(0, 1) - 1.0) < 1e-12

    def test_underresolved_grid(self, small):
        with pytest.raises(ResolutionError):
            analyze(GridField(small, np.zeros((small.N + 1, 64))), Basis.COSINE)
        with pytest.raises(ResolutionError):
            analyze(GridField(small, np.zeros((64, 2 * small.K + 1))), Basis.COSINE)

    @pytest.mark.parametrize("basis", [Basis.COSINE, Basis.SINE])
    def test_round_trip(self, small, rng, basis):
        f = random_field(small, basis, rng)
        back = analyze(synthesize(f, 2 * small.N + 3, 2 * small.K + 4), basis)
        np.testing.assert_allclose(back.coeffs, f.coeffs, atol=1e-13)


class TestSynthesize:
    def test_constant(self, small):
        g = synthesize(SpectralField.constant(small, 1.0), 9, 12)
        np.testing.assert_allclose(g.values, 1.0)

    def test_cos_pi_x(self, small):
        f = SpectralField.from_modes(small, Basis.COSINE, {(0, 1): 1.0})
        g = synthesize(f, 9, 12)
        np.testing.assert_allclose(g.values, np.cos(np.pi * g.x)[:, None] * np.ones(12), atol=1e-15)

    def test_matches_pointwise_evaluation(self, small, rng):
        f = random_field(small, Basis.SINE, rng)
        g = synthesize(f, 7, 16)
        np.testing.assert_allclose(g.values, evaluate(f, g.x, g.t), atol=1e-12)


class TestDerivatives:
    def test_dt_constant(self, small):
        assert dt(SpectralField.constant(small, 3.0)).max_abs() == 0.0

    def test_dt_cos(self, unit_period):
        p = unit_period
        f = SpectralField.from_modes(p, Basis.COSINE, {(1, 0): 0.5})
        t = np.linspace(0, 1, 11)
        np.testing.assert_allclose(evaluate(dt(f), 0.3, t)[0], -p.omega * np.sin(p.omega * t), atol=1e-13)

    def test_dt_dt_multiplier(self, small, rng):
        f = random_field(small, Basis.COSINE, rng)
        np.testing.assert_allclose(dt(dt(f)).coeffs, -((small.k * small.omega) ** 2) * f.coeffs, atol=1e-13)

    def test_dx_cos_pi_x(self, small):
        g = dx(SpectralField.from_modes(small, Basis.COSINE, {(0, 1): 1.0}))
        assert g.basis is Basis.SINE
        assert g.coeff(0, 1) == pytest.approx(-np.pi)

    def test_dx_constant(self, small):
        assert dx(SpectralField.constant(small, 2.0)).max_abs() == 0.0

    def test_dx_dx(self, small, rng):
        f = random_field(small, Basis.COSINE, rng)
        g = dx(dx(f))
        assert g.basis is Basis.COSINE
        np.testing.assert_allclose(g.coeffs, -((small.n * np.pi) ** 2) * f.coeffs, atol=1e-12)

    def test_dx_matches_finite_difference(self, small, rng):
        f = random_field(small, Basis.COSINE, rng, decay=2.0)
        x, t, h = 0.37, 1.1, 1e-5
        fd = (evaluate(f, x + h, t) - evaluate(f, x - h, t)) / (2 * h)
        assert evaluate(dx(f), x, t) == pytest.approx(fd, rel=1e-6, abs=1e-8)


class TestNorms:
    def test_constant(self, unit_period):
        one = SpectralField.constant(unit_period, 1.0)
        for gamma in (0, 1, 2.5):
            assert sobolev_norm(one, 0, gamma) == pytest.approx(1.0)

    def test_cos_omega_t_gamma_one(self, unit_period):
        f = SpectralField.from_modes(unit_period, Basis.COSINE, {(1, 0): 0.5})
        assert sobolev_norm(f, 0, 1) == pytest.approx(1.0)

    def test_cos_omega_t_against_quadrature(self, unit_period):
        p = unit_period
        f = SpectralField.from_modes(p, Basis.COSINE, {(1, 0): 0.5})
        # H^{0,1} norm squared = ||f||^2 + ||f_t||^2 / omega^2 in period-normalised form
        l2, _ = integrate.dblquad(lambda x, t: np.cos(p.omega * t) ** 2, 0, p.period, 0, 1)
        d2, _ = integrate.dblquad(lambda x, t: np.sin(p.omega * t) ** 2, 0, p.period, 0, 1)
        assert sobolev_norm(f, 0, 1) ** 2 == pytest.approx(p.period * (l2 + d2), rel=1e-10)

    def test_gamma_ratio(self, unit_period):
        f = SpectralField.from_modes(unit_period, Basis.COSINE, {(1, 0): 0.5})
        assert sobolev_norm(f, 0, 0) / sobolev_norm(f, 0, 1) == pytest.approx(2**-0.5)

    def test_spatial_derivative_levels(self, small, rng):
        f = random_field(small, Basis.COSINE, rng)
        n1 = sobolev_norm(f, 1, 1.0) ** 2
        assert n1 == pytest.approx(sobolev_norm(f, 0, 1.0) ** 2 + sobolev_norm(dx(f), 0, 1.0) ** 2)

    def test_rejects_negative_gamma(self, small):
        with pytest.raises(ParameterError):
            sobolev_norm(SpectralField.zeros(small), 0, -1.0)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**31), st.floats(0, 3))
    def test_monotone_in_gamma(self, seed, gamma):
        p = ProblemParams(omega=1.3, mu=0.5, K=4, N=4)
        f = random_field(p, Basis.COSINE, seed)
        assert sobolev_norm(f, 0, gamma) <= sobolev_norm(f, 0, gamma + 0.5) + 1e-12


class TestInner:
    def test_constants(self, unit_period):
        one = SpectralField.constant(unit_period, 1.0)
        assert inner(one, one) == pytest.approx(1.0)

    def test_orthogonality(self, unit_period):
        f = SpectralField.from_modes(unit_period, Basis.COSINE, {(0, 1): 1.0})
        assert inner(f, SpectralField.constant(unit_period, 1.0)) == pytest.approx(0.0, abs=1e-15)

    def test_cos_omega_t(self, unit_period):
        f = SpectralField.from_modes(unit_period, Basis.COSINE, {(1, 0): 0.5})
        ref, _ = integrate.dblquad(lambda x, t: np.cos(2 * np.pi * t) ** 2, 0, 1, 0, 1)
        assert inner(f, f) == pytest.approx(0.5)
        assert inner(f, f) == pytest.approx(ref, rel=1e-10)

    def test_parseval_against_grid(self, small, rng):
        f = random_field(small, Basis.COSINE, rng)
        g = random_field(small, Basis.COSINE, rng)
        nx, nt = 400, 2 * small.K + 2
        x = np.linspace(0, 1, nx)
        w = np.full(nx, 1.0 / (nx - 1))
        w[[0, -1]] *= 0.5
        a, b = synthesize(f, nx, nt).values, synthesize(g, nx, nt).values
        quad = small.period / nt * np.sum(w[:, None] * a * b)
        assert inner(f, g) == pytest.approx(quad, rel=1e-4)
        assert x.size == nx


class TestTrace:
    def test_cos_pi_x_at_zero(self, small):
        tr = trace_x(SpectralField.from_modes(small, Basis.COSINE, {(0, 1): 1.0}), 0.0)
        assert tr[small.K] == pytest.approx(1.0)
        assert np.count_nonzero(np.abs(tr) > 1e-15) == 1

    def test_sine_vanishes_at_walls(self, small, rng):
        f = random_field(small, Basis.SINE, rng)
        assert np.max(np.abs(trace_x(f, 0.0))) == 0.0
        assert np.max(np.abs(trace_x(f, 1.0))) < 1e-12

    def test_midpoint(self, small):
        f = SpectralField.from_modes(small, Basis.COSINE, {(1, 1): 0.5})
        assert np.max(np.abs(trace_x(f, 0.5))) < 1e-15


class TestCompositeNorms:
    def test_constant_u(self, unit_period):
        assert norm_U(SpectralField.constant(unit_period, 1.0), 2.0) == pytest.approx(1.0)

    def test_cos_pi_x(self, unit_period):
        p = unit_period
        u = SpectralField.from_modes(p, Basis.COSINE, {(0, 1): 1.0})
        # time-independent: ||u||^2 + ||u_x||^2 + ||u_tt - u_xx||^2, with int cos^2 = int sin^2 = 1/2
        cos2, _ = integrate.quad(lambda x: np.cos(np.pi * x) ** 2, 0, 1)
        expected = cos2 + np.pi**2 * cos2 + np.pi**4 * cos2
        assert norm_U(u, 1.0) ** 2 == pytest.approx(expected, rel=1e-12)

    def test_gamma_below_one(self, small):
        with pytest.raises(ParameterError):
            norm_U(SpectralField.zeros(small), 0.5)

    def test_vw_constants(self, unit_period):
        # (v, w) = (1, 1) is (u, z) = (1, 0)
        u = SpectralField.constant(unit_period, 1.0)
        z = SpectralField.zeros(unit_period, Basis.SINE)
        assert norm_V(u, z, 2.0) ** 2 == pytest.approx(2.0)
        assert norm_V(u, z, 2.0) == pytest.approx(math.sqrt(2) * norm_Z(u, z, 2.0))

    def test_norm_W(self, unit_period):
        g = SpectralField.constant(unit_period, 1.0)
        assert norm_W(g, SpectralField.zeros(unit_period), 1.0) == pytest.approx(1.0)


class TestRandomField:
    def test_real_and_reproducible(self, small):
        a = random_field(small, Basis.COSINE, 3)
        b = random_field(small, Basis.COSINE, 3)
        np.testing.assert_array_equal(a.coeffs, b.coeffs)
        grid = synthesize(a, 12, 12)
        assert np.all(np.isfinite(grid.values))

    def test_mean_zero(self, small):
        assert random_field(small, Basis.COSINE, 1, mean_zero=True).coeff(0, 0) == 0


class TestRealityInvariant:
    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**31), st.floats(-5, 5), st.sampled_from([Basis.COSINE, Basis.SINE]))
    def test_operations_stay_exactly_real(self, seed, scalar, basis):
        p = ProblemParams(omega=1.7, mu=0.4, K=4, N=5)
        a = random_field(p, basis, seed)
        b = random_field(p, basis, seed + 1)
        for f in (a + b, a - b, -a, a * scalar, dt(a), dx(a), dx(dx(a))):
            np.testing.assert_array_equal(f.coeffs, np.conj(f.coeffs[::-1]))
            if f.basis is Basis.SINE:
                assert not np.any(f.coeffs[:, 0])
