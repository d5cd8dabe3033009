import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shearmhd.spectral import (Grid, SpectralField, conj_flip, convolution_direct,
                               dealias_mask, from_physical, hermitian_defect,
                               hermitize, l2_norm, lambda_t, nonlinear_product,
                               physical_l2_norm, random_hermitian_coeffs,
                               shear_symbols, sheared_gradient, to_physical)


class TestGrid:
    def test_validation(self):
        with pytest.raises(ValueError):
            Grid(3, 8)
        with pytest.raises(ValueError):
            Grid(8, 9)
        with pytest.raises(ValueError):
            Grid(8, 8, -1.0)

    def test_mode_bijection(self, grid16):
        ks = sorted(grid16.k.astype(int))
        assert ks == list(range(-8, 8))
        etas = sorted((grid16.eta * grid16.Ly).astype(int))
        assert etas == list(range(-8, 8))

    def test_eta_spacing(self):
        g = Grid(8, 8, 2.0)
        assert np.isclose(np.min(np.abs(g.eta[g.eta > 0])), 0.5)


class TestDealiasMask:
    def test_two_thirds_rule_12(self):
        m = dealias_mask(Grid(12, 12, 1.0))
        k = np.fft.fftfreq(12, 1 / 12)
        for i, kv in enumerate(k):
            assert m[i, 0] == (abs(kv) <= 4)

    def test_two_thirds_rule_6(self):
        m = dealias_mask(Grid(6, 6, 1.0))
        k = np.fft.fftfreq(6, 1 / 6)
        # Nx=6 is below the Grid minimum of 4? 6 >= 4, fine
        for i, kv in enumerate(k):
            assert m[i, 0] == (abs(kv) <= 2)

    def test_idempotent(self, grid16, rng):
        c = random_hermitian_coeffs(grid16, rng)
        once = c * grid16.dealias_keep
        assert np.array_equal(once * grid16.dealias_keep, once)


class TestTransforms:
    def test_roundtrip(self, grid16, rng):
        c = random_hermitian_coeffs(grid16, rng)
        c2 = from_physical(grid16, to_physical(grid16, c))
        assert np.max(np.abs(c - c2)) <= 1e-12 * np.max(np.abs(c))

    def test_real_physical_values(self, grid16, rng):
        c = random_hermitian_coeffs(grid16, rng)
        p = to_physical(grid16, c)
        assert np.max(np.abs(p.imag)) <= 1e-12 * np.max(np.abs(p.real))

    def test_parseval(self, grid16, rng):
        c = random_hermitian_coeffs(grid16, rng)
        assert abs(physical_l2_norm(grid16, c) - l2_norm(grid16, c)) \
            <= 1e-12 * l2_norm(grid16, c)

    def test_parseval_nonunit_Ly(self, rng):
        g = Grid(16, 16, 3.0)
        c = random_hermitian_coeffs(g, rng)
        assert abs(physical_l2_norm(g, c) - l2_norm(g, c)) <= 1e-12 * l2_norm(g, c)


class TestHermitian:
    def test_conj_flip_involution(self, grid16, rng):
        c = rng.standard_normal(grid16.shape) + 1j * rng.standard_normal(grid16.shape)
        assert np.allclose(conj_flip(conj_flip(c)), c)

    def test_hermitize_projects(self, grid16, rng):
        c = rng.standard_normal(grid16.shape) + 1j * rng.standard_normal(grid16.shape)
        h = hermitize(c)
        assert hermitian_defect(h) <= 1e-14

    def test_reality_flag_enforced(self, grid16, rng):
        c = rng.standard_normal(grid16.shape) + 1j * rng.standard_normal(grid16.shape)
        with pytest.raises(ValueError, match="Hermitian"):
            SpectralField(grid16, c, reality=True)
        SpectralField(grid16, c, reality=False)


class TestLambdaT:
    def test_unit_mode(self):
        assert lambda_t(1, 0.0, 0.0) == 1.0

    def test_critical_time(self):
        assert lambda_t(1, 5.0, 5.0) == 1.0

    def test_arithmetic(self):
        assert np.isclose(lambda_t(2, 3.0, 1.0), np.sqrt(5.0))

    def test_zero_mode(self):
        assert lambda_t(0, 0.0, 3.0) == 0.0

    @given(k=st.integers(-50, 50), eta=st.floats(-100, 100),
           t=st.floats(-20, 20))
    @settings(max_examples=200)
    def test_symbol_identity(self, k, eta, t):
        # Lambda_t(k, eta, t) = Lambda_0(k, eta - k t)
        assert np.isclose(lambda_t(k, eta, t), lambda_t(k, eta - k * t, 0.0),
                          rtol=1e-12, atol=1e-12)

    @given(k=st.integers(-50, 50).filter(lambda k: k != 0),
           eta=st.floats(-100, 100), t=st.floats(-20, 20))
    @settings(max_examples=200)
    def test_lower_bound(self, k, eta, t):
        assert lambda_t(k, eta, t) >= abs(k) - 1e-12


class TestShearedGradient:
    def test_single_mode_t0(self, grid16):
        f = grid16.zeros()
        f[1, 0] = 1.0
        fx, fy = sheared_gradient(SpectralField(grid16, f, reality=False), 0.0)
        assert fx[1, 0] == 1j and fy[1, 0] == 0.0

    def test_critical_time(self, grid16):
        f = grid16.zeros()
        f[1, 2] = 1.0
        fx, fy = sheared_gradient(SpectralField(grid16, f, reality=False), 2.0)
        assert fx[1, 2] == 1j and abs(fy[1, 2]) <= 1e-15

    def test_derived_mode(self, grid16):
        f = grid16.zeros()
        f[2, 1] = 1.0
        fx, fy = sheared_gradient(SpectralField(grid16, f, reality=False), 3.0)
        assert fx[2, 1] == 2j and fy[2, 1] == -5j


class TestNonlinearProduct:
    def test_zero(self, grid16):
        z = SpectralField(grid16, grid16.zeros())
        assert np.all(nonlinear_product(z, z).coeffs == 0)

    def test_constant_one(self, grid16):
        c = grid16.zeros()
        c[0, 0] = 1.0
        f = SpectralField(grid16, c)
        out = nonlinear_product(f, f).coeffs
        assert np.max(np.abs(out - c)) <= 1e-14

    def test_grid_mismatch(self, grid16):
        other = Grid(8, 8, 1.0)
        with pytest.raises(ValueError, match="grid"):
            nonlinear_product(SpectralField(grid16, grid16.zeros()),
                              SpectralField(other, other.zeros()))

    def test_pair_mode_zero_component(self):
        g = Grid(8, 8, 1.0)
        f = g.zeros()
        f[1, 0] = 1.0
        f[-1 % 8, 0] = 1.0
        out = nonlinear_product(SpectralField(g, f), SpectralField(g, f)).coeffs
        conv = convolution_direct(g, f, f) * g.dealias_keep
        assert np.isclose(out[0, 0], conv[0, 0])
        assert np.isclose(out[0, 0], 2.0)

    @pytest.mark.parametrize("n", [8, 12, 16])
    def test_against_direct_convolution(self, n, rng):
        g = Grid(n, n, 1.0)
        f = random_hermitian_coeffs(g, rng) * g.dealias_keep
        h = random_hermitian_coeffs(g, rng) * g.dealias_keep
        out = nonlinear_product(SpectralField(g, f), SpectralField(g, h)).coeffs
        conv = convolution_direct(g, f, h) * g.dealias_keep
        scale = np.max(np.abs(conv))
        assert np.max(np.abs(out - conv)) <= 1e-12 * scale

    def test_dealiased_modes_exactly_zero(self, grid16, rng):
        f = random_hermitian_coeffs(grid16, rng)
        out = nonlinear_product(SpectralField(grid16, f), SpectralField(grid16, f))
        assert np.all(out.coeffs[~grid16.dealias_keep] == 0.0)


class TestShearSymbols:
    def test_inv_lap_zero_mode(self, grid16):
        sym = shear_symbols(grid16, 1.3)
        assert sym.inv_lap[0, 0] == 0.0
        nz = sym.lam2 > 0
        assert np.allclose(sym.inv_lap[nz], -1.0 / sym.lam2[nz])
