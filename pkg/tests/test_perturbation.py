import numpy as np
import pytest
import scipy.io
from hypothesis import given, settings
from hypothesis import strategies as st

from telegraph.perturbation import (
    PerturbationData,
    SizeError,
    apply_perturbed,
    assemble,
    field_product,
    fredholm_diagnostics,
    from_vector,
    mode_index,
    multiplication_matrix,
    real_kernel_field,
    solve_perturbed,
    to_vector,
)
from telegraph.spectral import Basis, ProblemParams, SpectralField, random_field, sobolev_norm, synthesize
from telegraph.telegraph import multiplier_array, solve_LTE


def _nu(p, eps, modes=None):
    modes = modes or {(1, 0): 0.5}
    return SpectralField.constant(p, 2 * p.mu) + SpectralField.from_modes(p, Basis.COSINE, modes) * eps


@pytest.fixture
def p8():
    return ProblemParams(omega=2 * np.pi, mu=1.0, K=6, N=6)


class TestVectors:
    def test_ordering(self, p8):
        f = SpectralField.from_modes(p8, Basis.COSINE, {(2, 3): 1.0})
        v = to_vector(f)
        assert v[mode_index(2, 3, p8)] == 1.0
        assert mode_index(2, 3, p8) == (2 + p8.K) * (p8.N + 1) + 3

    def test_round_trip(self, p8, rng):
        f = random_field(p8, Basis.COSINE, rng)
        np.testing.assert_array_equal(from_vector(to_vector(f), p8).coeffs, f.coeffs)


class TestFieldProduct:
    def test_identity(self, p8, rng):
        b = random_field(p8, Basis.COSINE, rng)
        prod, loss = field_product(SpectralField.constant(p8, 1.0), b)
        np.testing.assert_allclose(prod.coeffs, b.coeffs, atol=1e-15)
        assert loss == 0

    def test_cos_squared(self, p8):
        c = SpectralField.from_modes(p8, Basis.COSINE, {(0, 1): 1.0})
        prod, _ = field_product(c, c)
        assert prod.coeff(0, 0) == pytest.approx(0.5)
        assert prod.coeff(0, 2) == pytest.approx(0.5)

    def test_sine_times_cosine_is_sine(self, p8):
        s = SpectralField.from_modes(p8, Basis.SINE, {(0, 1): 1.0})
        c = SpectralField.from_modes(p8, Basis.COSINE, {(0, 1): 1.0})
        prod, _ = field_product(s, c)
        # sin(pi x) cos(pi x) = sin(2 pi x) / 2
        assert prod.basis is Basis.SINE
        assert prod.coeff(0, 2) == pytest.approx(0.5)

    @pytest.mark.parametrize("bases", [(Basis.COSINE, Basis.COSINE), (Basis.SINE, Basis.COSINE), (Basis.SINE, Basis.SINE)])
    def test_grid_oracle(self, bases, rng):
        p = ProblemParams(omega=1.0, mu=1.0, K=4, N=4)
        a, b = random_field(p, bases[0], rng, 1.0), random_field(p, bases[1], rng, 1.0)
        prod, loss = field_product(a, b)
        big = p.replace(K=2 * p.K, N=2 * p.N)
        exact, lost = field_product(a.retruncate(big), b.retruncate(big))
        assert lost == 0
        nx, nt = 4 * p.N + 3, 4 * p.K + 4
        pointwise = synthesize(a, nx, nt).values * synthesize(b, nx, nt).values
        np.testing.assert_allclose(synthesize(exact, nx, nt).values, pointwise, atol=1e-12)
        # the reported loss is exactly the norm of what truncation dropped
        assert sobolev_norm(exact - prod.retruncate(big), 0, 0) == pytest.approx(loss, rel=1e-10)


class TestMultiplicationMatrix:
    def test_matches_field_product(self, p8, rng):
        a = random_field(p8, Basis.COSINE, rng)
        u = random_field(p8, Basis.COSINE, rng)
        prod, _ = field_product(a, u)
        np.testing.assert_allclose(multiplication_matrix(a) @ to_vector(u), to_vector(prod), atol=1e-12)


class TestAssemble:
    def test_unperturbed_is_diagonal(self, p8):
        sys = assemble(PerturbationData.trivial(p8), p8)
        np.testing.assert_array_equal(sys.matrix, np.diag(multiplier_array(p8).ravel()))

    def test_time_coupling_band(self, p8):
        A = assemble(PerturbationData(_nu(p8, 0.01), SpectralField.zeros(p8), p8.mu), p8).matrix
        rows, cols = np.nonzero(np.abs(A) > 0)
        kr, kc = rows // (p8.N + 1), cols // (p8.N + 1)
        nr, nc = rows % (p8.N + 1), cols % (p8.N + 1)
        assert np.max(np.abs(kr - kc)) == 1
        assert np.all(nr == nc)

    def test_space_coupling_band(self, p8):
        alpha = SpectralField.from_modes(p8, Basis.COSINE, {(0, 1): 0.01})
        A = assemble(PerturbationData(SpectralField.constant(p8, 2.0), alpha, p8.mu), p8).matrix
        rows, cols = np.nonzero(np.abs(A) > 0)
        nr, nc = rows % (p8.N + 1), cols % (p8.N + 1)
        assert np.all(rows // (p8.N + 1) == cols // (p8.N + 1))
        assert np.max(np.abs(nr - nc)) == 1

    def test_matrix_matches_operator(self, p8, rng):
        pert = PerturbationData(_nu(p8, 0.1, {(1, 1): 0.3, (2, 0): 0.2j}), random_field(p8, Basis.COSINE, rng, 2.0) * 0.1, p8.mu)
        u = random_field(p8, Basis.COSINE, rng)
        A = assemble(pert, p8).matrix
        np.testing.assert_allclose(A @ to_vector(u), to_vector(apply_perturbed(u, pert)), atol=1e-10)

    def test_size_guard(self):
        p = ProblemParams(omega=1.0, mu=1.0, K=80, N=80)
        with pytest.raises(SizeError):
            assemble(PerturbationData.trivial(p), p)

    def test_export(self, p8, tmp_path):
        sys = assemble(PerturbationData.trivial(p8), p8)
        sys.export(tmp_path / "A.mtx")
        np.testing.assert_allclose(scipy.io.mmread(str(tmp_path / "A.mtx")), sys.matrix)


class TestFredholm:
    def test_unperturbed(self, p8):
        d = fredholm_diagnostics(assemble(PerturbationData.trivial(p8), p8))
        assert d.kernel_dim == 1 and d.index == 0
        assert d.sigma_min_complement == pytest.approx(np.pi**2)

    def test_small_damping_perturbation(self, p8):
        d = fredholm_diagnostics(assemble(PerturbationData(_nu(p8, 0.01), SpectralField.zeros(p8), p8.mu), p8))
        assert d.kernel_dim == 1 and d.index == 0
        assert d.sigma_min_complement > 1.0

    def test_alpha_shift_moves_kernel(self, p8):
        alpha = SpectralField.constant(p8, -np.pi**2)
        d = fredholm_diagnostics(assemble(PerturbationData(SpectralField.constant(p8, 2.0), alpha, p8.mu), p8))
        assert d.index == 0
        assert d.kernel_dim == 1
        ker = real_kernel_field(d.kernel[:, 0], p8)
        assert abs(ker.coeff(0, 1)) == pytest.approx(1.0)
        assert ker.coeff(0, 0) == 0

    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 2**31))
    def test_small_alpha_keeps_index(self, seed):
        # a generic zeroth-order term removes the constant kernel but keeps index zero
        p = ProblemParams(omega=2.0, mu=0.5, K=4, N=4)
        alpha = random_field(p, Basis.COSINE, seed, 2.0)
        alpha = alpha * (0.01 / max(sobolev_norm(alpha, 0, 0), 1e-300))
        d = fredholm_diagnostics(assemble(PerturbationData(SpectralField.constant(p, 1.0), alpha, p.mu), p))
        assert d.index == 0
        assert d.kernel_dim <= 1


class TestSolvePerturbed:
    def test_trivial_matches_diagonal_solve(self, p8):
        f = SpectralField.from_modes(p8, Basis.COSINE, {(0, 1): 1.0})
        a = solve_perturbed(f, PerturbationData.trivial(p8), p8)
        b = solve_LTE(f, p8)
        np.testing.assert_allclose(a.solution.coeffs, b.solution.coeffs, atol=1e-10)

    def test_linear_response(self, p8, rng):
        f = random_field(p8, Basis.COSINE, rng, 1.0, mean_zero=True)
        u0 = solve_perturbed(f, PerturbationData.trivial(p8), p8).solution
        diffs = []
        for eps in (1e-2, 1e-3):
            u = solve_perturbed(f, PerturbationData(_nu(p8, eps), SpectralField.zeros(p8), p8.mu), p8)
            # forcing leaves the shifted range by O(eps); the residual is that unreachable part
            assert u.residual < 10 * eps * sobolev_norm(f, 0, 1)
            diffs.append(sobolev_norm(u.solution - u0, 0, 0))
        assert diffs[0] / diffs[1] == pytest.approx(10.0, rel=0.05)

    def test_range_forcing_has_small_residual(self, p8, rng):
        pert = PerturbationData(_nu(p8, 0.01), SpectralField.zeros(p8), p8.mu)
        target = random_field(p8, Basis.COSINE, rng, 1.0)
        rep = solve_perturbed(apply_perturbed(target, pert), pert, p8)
        assert rep.solvable
        assert rep.residual < 1e-10

    def test_constant_forcing_defect(self, p8):
        rep = solve_perturbed(SpectralField.constant(p8, 1.0), PerturbationData(_nu(p8, 0.01), SpectralField.zeros(p8), p8.mu), p8)
        assert rep.solvability_defect > 0.1
        assert not rep.solvable
