import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holder_hj.envelope import (
    NumericsWarning,
    derive_conjugates,
    hopf_lax_step,
    legendre_oracle,
    one_sided_upper_bound,
)


class TestDeriveConjugates:
    def test_quadratic_unit_delta(self):
        env = derive_conjugates(2.0, 1.0, 0.0, 0.0)
        assert env.p == 2.0
        assert abs(env.c_plus - 0.25) <= 1e-12
        assert abs(env.c_minus - 0.25) <= 1e-12
        assert env.c_zero == 0.0
        assert env.c_one == 1.0

    def test_cubic_delta_two(self):
        env = derive_conjugates(3.0, 2.0)
        assert env.p == 1.5
        expected = 2.0 ** (-0.5) / (1.5 * 3.0**0.5)
        assert abs(env.c_plus - expected) <= 1e-15
        assert abs(env.c_plus - 0.27217) <= 5e-6

    def test_cubic_matches_oracle(self):
        env = derive_conjugates(3.0, 2.0)
        value = legendre_oracle(
            env.hamiltonian_plus, np.array([1.0]), search_radius=2.0, samples=4001
        )
        assert abs(value - env.c_plus) <= 1e-4

    def test_rejects_bad_exponents(self):
        with pytest.raises(ValueError):
            derive_conjugates(1.0, 1.0)
        with pytest.raises(ValueError):
            derive_conjugates(0.5, 1.0)
        with pytest.raises(ValueError):
            derive_conjugates(2.0, 0.9)
        with pytest.raises(ValueError):
            derive_conjugates(2.0, 1.0, eta_plus=-1.0)

    @given(st.floats(min_value=1.01, max_value=4.0), st.floats(min_value=1.0, max_value=4.0))
    def test_conjugate_identities(self, q, delta):
        env = derive_conjugates(q, delta)
        assert abs(1.0 / env.p + 1.0 / env.q - 1.0) <= 1e-12
        assert env.c_minus >= env.c_plus
        assert env.c_one >= 1.0
        if delta > 1.0:
            assert env.c_one > 1.0

    def test_conjugate_duality_sample(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            q = float(rng.uniform(1.1, 4.0))
            delta = float(rng.uniform(1.0, 4.0))
            env = derive_conjugates(q, delta)
            for _ in range(5):
                w = float(rng.uniform(-3.0, 3.0))
                radius = 2.0 * (abs(w) / (delta * q)) ** (1.0 / (q - 1.0)) + 1.0
                value = legendre_oracle(
                    env.hamiltonian_plus, np.array([w]), radius, samples=2001
                )
                expected = env.conjugate_plus(w)
                assert abs(value - expected) <= 1e-3 * (1.0 + abs(expected))


class TestLegendreOracle:
    def test_quadratic_2d(self):
        def ham(z):
            return np.sum(z * z, axis=-1)

        value = legendre_oracle(ham, np.array([2.0, 0.0]), search_radius=3.0, samples=601)
        assert abs(value - 1.0) <= 1e-4

    def test_zero_gradient(self):
        def ham(z):
            return np.sum(z * z, axis=-1)

        assert legendre_oracle(ham, np.array([0.0]), 1.0, samples=1001) == pytest.approx(0.0, abs=1e-12)

    def test_boundary_flagged(self):
        def ham(z):
            return np.sum(z * z, axis=-1)

        with pytest.raises(ValueError, match="boundary"):
            legendre_oracle(ham, np.array([10.0]), search_radius=1.0, samples=101)

    def test_monotone_under_nested_refinement(self):
        def ham(z):
            return 2.0 * np.abs(z[:, 0]) ** 3

        coarse = legendre_oracle(ham, np.array([1.0]), 2.0, samples=501)
        fine = legendre_oracle(ham, np.array([1.0]), 2.0, samples=1001)
        assert fine >= coarse - 1e-15


class TestHopfLaxStep:
    def setup_method(self):
        self.x = np.linspace(-2.0, 2.0, 401)

    def test_constant_data(self):
        eta_plus = 0.3
        u = np.full_like(self.x, 1.7)
        v = hopf_lax_step(u, self.x, tau=0.05, conjugate_coeff=0.25,
                          conjugate_exponent=2.0, eta_shift=-eta_plus)
        assert np.allclose(v, 1.7 - 0.05 * eta_plus, atol=1e-14)

    def test_quadratic_complete_the_square(self):
        # running cost (y-x)^2/tau: one step from (y-1)^2 gives (x-1)^2/(1+tau)
        tau = 0.1
        u = (self.x - 1.0) ** 2
        v = hopf_lax_step(u, self.x, tau, conjugate_coeff=1.0,
                          conjugate_exponent=2.0, refine=True)
        inner = slice(50, 351)
        expected = (self.x - 1.0) ** 2 / (1.0 + tau)
        assert np.abs(v[inner] - expected[inner]).max() <= 1e-10

    def test_indicator_terminal_matches_naive_min(self):
        big_g = 1.5
        g4 = np.minimum(big_g, 4.0 * np.abs(self.x - 1.0))
        tau = 0.01
        v = hopf_lax_step(g4, self.x, tau, conjugate_coeff=0.25, conjugate_exponent=2.0)
        # naive full minimization over the whole grid
        diff = self.x[None, :] - self.x[:, None]
        naive = np.min(tau * 0.25 * np.abs(diff / tau) ** 2 + g4[None, :], axis=1)
        assert np.allclose(v, naive)
        assert np.all(np.isfinite(v))
        assert np.all(v <= big_g + 1e-12)

    def test_monotone_in_data(self):
        rng = np.random.default_rng(0)
        u = rng.uniform(0.0, 1.0, self.x.size)
        v = u + rng.uniform(0.0, 1.0, self.x.size)
        step_u = hopf_lax_step(u, self.x, 0.05, 0.25, 2.0)
        step_v = hopf_lax_step(v, self.x, 0.05, 0.25, 2.0)
        assert np.all(step_u <= step_v + 1e-14)

    def test_translation_covariance(self):
        rng = np.random.default_rng(1)
        u = rng.uniform(0.0, 1.0, self.x.size)
        base = hopf_lax_step(u, self.x, 0.05, 0.25, 2.0)
        shifted = hopf_lax_step(u + 0.37, self.x, 0.05, 0.25, 2.0)
        assert np.allclose(shifted, base + 0.37, atol=1e-13)

    def test_rejects_nonpositive_tau(self):
        with pytest.raises(ValueError):
            hopf_lax_step(np.zeros(5), np.linspace(0, 1, 5), 0.0, 0.25, 2.0)


class TestOneSidedUpperBound:
    def setup_method(self):
        self.env = derive_conjugates(2.0, 1.0, 0.0, 0.0)

    def test_zero_displacement(self):
        env = derive_conjugates(2.0, 1.0, 0.0, 0.4)
        assert one_sided_upper_bound(1.0, 0.0, 0.0, s=1.5, t=1.0, env=env) == pytest.approx(
            1.0 + 0.4 * 0.5
        )

    def test_unit_displacement(self):
        assert one_sided_upper_bound(2.0, 0.0, 1.0, s=2.0, t=1.0, env=self.env) == pytest.approx(2.25)

    def test_short_window(self):
        value = one_sided_upper_bound(0.0, 0.0, 0.2, s=0.01, t=0.0, env=self.env)
        assert value == pytest.approx(1.0)

    @settings(max_examples=50)
    @given(
        st.floats(min_value=0.01, max_value=2.0),
        st.floats(min_value=0.01, max_value=1.0),
        st.floats(min_value=1.2, max_value=3.5),
    )
    def test_scale_exactness(self, disp, gap, q):
        env = derive_conjugates(q, 1.5)
        base = one_sided_upper_bound(0.0, 0.0, disp, s=gap, t=0.0, env=env)
        doubled = one_sided_upper_bound(0.0, 0.0, 2.0 * disp, s=gap, t=0.0, env=env)
        assert doubled == pytest.approx(2.0**env.p * base, rel=1e-12)

    def test_rejects_backward_window(self):
        with pytest.raises(ValueError):
            one_sided_upper_bound(0.0, 0.0, 1.0, s=1.0, t=1.0, env=self.env)
