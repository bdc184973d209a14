import math

import numpy as np
import pytest

from holder_hj.envelope import NumericsWarning
from holder_hj.reverse_holder import SampledFunction1D, min_hypothesis_constant
from holder_hj import stochastic as sto


def gaussian_abs_moment(r: float) -> float:
    """E|Z|^r for standard normal Z."""
    return 2.0 ** (r / 2.0) * math.gamma((r + 1.0) / 2.0) / math.sqrt(math.pi)


@pytest.fixture(scope="module")
def unit_sde():
    return sto.SdeSpec(sigma=sto.constant_sigma(1.0), sigma_bound=1.0)


@pytest.fixture(scope="module")
def silent_sde():
    # zero diffusion; sigma_bound stays positive as an upper bound
    return sto.SdeSpec(sigma=sto.constant_sigma(0.0), sigma_bound=1.0)


class TestBridgeSpec:
    def test_default_alpha(self):
        spec = sto.BridgeSpec(start=[0.0], target=[0.0], horizon=1.0, p=1.5)
        assert spec.alpha == pytest.approx(13.0 / 12.0)

    def test_alpha_validation(self):
        with pytest.raises(ValueError):
            sto.BridgeSpec(start=[0.0], target=[0.0], horizon=1.0, p=1.5, alpha=0.2)
        with pytest.raises(ValueError):
            sto.BridgeSpec(start=[0.0], target=[0.0], horizon=1.0, p=2.5)


class TestSimulateBridge:
    def test_fixed_point_without_noise(self, silent_sde):
        spec = sto.BridgeSpec(start=[0.4], target=[0.4], horizon=1.0, p=1.5)
        ens = sto.simulate_bridge(spec, silent_sde, dt=5e-3, paths=2, seed=0)
        assert np.all(ens.paths == 0.4)
        assert np.all(ens.controls == 0.0)

    def test_zero_noise_closed_form(self, silent_sde):
        spec = sto.BridgeSpec(start=[1.0], target=[0.0], horizon=1.0, p=1.5)
        ens = sto.simulate_bridge(spec, silent_sde, dt=1e-4, paths=1, seed=0)
        closed = sto.bridge_closed_form_path(spec, ens.times)
        assert np.abs(ens.paths[0] - closed).max() <= 1e-4

    def test_pinned_exactly(self, unit_sde):
        spec = sto.BridgeSpec(start=[0.3], target=[-0.2], horizon=0.5, p=1.5)
        ens = sto.simulate_bridge(spec, unit_sde, dt=1e-3, paths=64, seed=1)
        assert np.all(ens.paths[:, -1, :] == -0.2)

    def test_seed_determinism(self, unit_sde):
        spec = sto.BridgeSpec(start=[0.0], target=[0.0], horizon=1.0, p=1.5)
        a = sto.simulate_bridge(spec, unit_sde, dt=2e-3, paths=16, seed=42)
        b = sto.simulate_bridge(spec, unit_sde, dt=2e-3, paths=16, seed=42)
        c = sto.simulate_bridge(spec, unit_sde, dt=2e-3, paths=16, seed=43)
        assert np.array_equal(a.paths, b.paths)
        assert np.array_equal(a.controls, b.controls)
        assert not np.array_equal(a.paths, c.paths)

    def test_gaussian_variance_matches_closed_form(self, unit_sde):
        spec = sto.BridgeSpec(start=[0.0], target=[0.0], horizon=1.0, p=1.5)
        ens = sto.simulate_bridge(spec, unit_sde, dt=1e-3, paths=8000, seed=3)
        alpha = spec.alpha
        k = 500  # t = 0.5
        var_exact = ((1.0 - 0.5) - (1.0 - 0.5) ** (2 * alpha)) / (2 * alpha - 1.0)
        sample = ens.paths[:, k, 0]
        se = var_exact * math.sqrt(2.0 / sample.size)
        assert sample.var() == pytest.approx(var_exact, abs=4.0 * se)

    def test_variance_at_pinning_nonincreasing_in_dt(self, unit_sde):
        spec = sto.BridgeSpec(start=[0.0], target=[0.0], horizon=1.0, p=1.5)
        variances = []
        for dt in (4e-3, 2e-3, 1e-3):
            ens = sto.simulate_bridge(spec, unit_sde, dt=dt, paths=256, seed=4)
            variances.append(float(ens.paths[:, -1, 0].var()))
        assert all(v2 <= v1 + 1e-15 for v1, v2 in zip(variances, variances[1:]))

    def test_rejects_large_dt(self, unit_sde):
        spec = sto.BridgeSpec(start=[0.0], target=[0.0], horizon=1.0, p=1.5)
        with pytest.raises(ValueError):
            sto.simulate_bridge(spec, unit_sde, dt=0.02, paths=4, seed=0)


class TestBridgeEnergy:
    def test_deterministic_energy_closed_form(self, silent_sde):
        # zero noise, unit displacement: int alpha^p (1-t)^(p(alpha-1)) dt
        spec = sto.BridgeSpec(start=[1.0], target=[0.0], horizon=1.0, p=1.5)
        ens = sto.simulate_bridge(spec, silent_sde, dt=1e-4, paths=1, seed=0)
        rep = sto.bridge_energy_check(ens, spec)
        alpha, p = spec.alpha, spec.p
        exact = alpha**p / (1.0 + p * (alpha - 1.0))
        assert rep.estimate == pytest.approx(exact, rel=1e-3)
        assert rep.shape == pytest.approx(2.0)  # T=1, |y-x|=1

    def test_zero_energy_at_fixed_point(self, silent_sde):
        spec = sto.BridgeSpec(start=[0.0], target=[0.0], horizon=1.0, p=1.5)
        ens = sto.simulate_bridge(spec, silent_sde, dt=1e-3, paths=2, seed=0)
        assert sto.bridge_energy_check(ens, spec).estimate == 0.0

    def test_scaling_slope(self):
        rep = sto.bridge_scaling_sweep([0.25, 0.5, 1.0], p=1.5, steps=400, paths=4000, seed=5)
        assert rep.slope == pytest.approx(0.25, abs=0.1)

    def test_ratio_bounded_over_family(self, unit_sde):
        ratios = []
        for start, T in [(0.0, 0.5), (1.0, 0.5), (0.5, 1.0), (0.0, 1.0)]:
            spec = sto.BridgeSpec(start=[start], target=[0.0], horizon=T, p=1.5)
            ens = sto.simulate_bridge(spec, unit_sde, dt=T / 500, paths=2000, seed=6)
            ratios.append(sto.bridge_energy_check(ens, spec).ratio)
        assert max(ratios) <= 10.0


class TestMomentBound:
    PAIRS = [(0.0, 0.2), (0.1, 0.5), (0.3, 0.9), (0.05, 0.1), (0.5, 1.0)]

    def test_zero_noise_zero_control(self, silent_sde):
        rep = sto.moment_bound_check(
            silent_sde, None, 1.5, self.PAIRS, horizon=1.0, dt=1e-3, paths=8, seed=0
        )
        assert np.all(rep.ratios == 0.0)

    def test_pure_brownian_r2_is_one(self):
        ratio, stderr = sto.brownian_ratio_statistic(
            self.PAIRS, dt=1e-3, paths=6000, seed=1
        )
        assert abs(ratio - 1.0) <= 3.0 * stderr

    def test_drifted_ratios_uniform(self, unit_sde):
        rep = sto.moment_bound_check(
            unit_sde,
            lambda y, t: np.ones_like(y),
            1.5,
            self.PAIRS,
            horizon=1.0,
            dt=1e-3,
            paths=4000,
            seed=2,
        )
        assert rep.max_ratio <= 4.0 * rep.median_ratio

    def test_underresolved_pair_warns(self, unit_sde):
        with pytest.warns(NumericsWarning, match="under-resolved"):
            sto.moment_bound_check(
                unit_sde, None, 2.0, [(0.0, 0.005)], horizon=1.0, dt=1e-3, paths=4, seed=0
            )

    def test_martingale_sanity(self, unit_sde):
        ens = sto.simulate_controlled(unit_sde, None, 1.0, 1e-2, paths=4000, seed=7)
        drift = ens.paths[:, :, 0].mean(axis=0)
        se = np.sqrt(np.maximum(ens.times, 1e-12) / ens.path_count)
        assert np.all(np.abs(drift[1:]) <= 3.0 * se[1:] + 1e-12)


class TestStochasticRevHolder:
    def test_zero_controls_trivial(self):
        times = np.linspace(0.0, 1.0, 101)
        ens = sto.PathEnsemble(
            times=times,
            paths=np.zeros((4, 101, 1)),
            controls=np.zeros((4, 100, 1)),
            seed=0,
            dt=0.01,
        )
        rep = sto.stochastic_revholder_check(ens, 1.5)
        assert rep.worst_margin >= 0.0

    def test_deterministic_collapse_matches_reverse_holder(self):
        # replicated deterministic control: the fitted A equals the
        # deterministic hypothesis scan exactly, with B = 0
        gamma, p, n = 0.75, 1.5, 1000
        times = np.linspace(0.0, 1.0, n + 1)
        zeta = gamma * np.maximum(times[:-1], 1e-300) ** (gamma - 1.0)
        zeta[0] = gamma * (0.5 / n) ** (gamma - 1.0)
        ens = sto.PathEnsemble(
            times=times,
            paths=np.zeros((4, n + 1, 1)),
            controls=np.tile(zeta[None, :, None], (4, 1, 1)),
            seed=0,
            dt=1.0 / n,
        )
        rep = sto.stochastic_revholder_check(ens, p)
        phi = SampledFunction1D((0.0, 1.0), zeta, p)
        assert rep.A == pytest.approx(min_hypothesis_constant(phi), abs=1e-6)
        assert rep.B == 0.0
        assert rep.worst_margin >= 0.0

    def test_bridge_controls_satisfy_conclusion(self):
        spec = sto.BridgeSpec(start=[0.0], target=[0.0], horizon=1.0, p=1.5)
        sde = sto.SdeSpec(sigma=sto.constant_sigma(1.0), sigma_bound=1.0)
        ens = sto.simulate_bridge(spec, sde, dt=1e-3, paths=4000, seed=8)
        rep = sto.stochastic_revholder_check(ens, 1.5)
        assert rep.A > 1.0
        assert rep.worst_margin >= 0.0
        assert not rep.degenerate

    def test_capped_A_moves_mass_to_B(self):
        spec = sto.BridgeSpec(start=[0.0], target=[0.0], horizon=1.0, p=1.5)
        sde = sto.SdeSpec(sigma=sto.constant_sigma(1.0), sigma_bound=1.0)
        ens = sto.simulate_bridge(spec, sde, dt=2e-3, paths=1000, seed=9)
        free = sto.stochastic_revholder_check(ens, 1.5)
        capped = sto.stochastic_revholder_check(ens, 1.5, a_cap=1.0 + 1e-6)
        assert capped.A == pytest.approx(1.0 + 1e-6)
        assert capped.B > 0.0
        assert capped.B >= free.B
        assert capped.worst_margin >= 0.0


class TestPathEnsembleIO:
    def test_save_load_roundtrip(self, tmp_path, unit_sde):
        spec = sto.BridgeSpec(start=[0.5], target=[0.0], horizon=0.5, p=1.5)
        ens = sto.simulate_bridge(spec, unit_sde, dt=5e-3, paths=6, seed=10)
        ens.save(tmp_path / "ens")
        back = sto.PathEnsemble.load(tmp_path / "ens")
        assert back.seed == ens.seed and back.dt == ens.dt
        assert np.allclose(back.paths, ens.paths, atol=1e-10)
        assert np.allclose(back.controls, ens.controls, atol=1e-10)

    def test_vector_state_not_serializable(self, tmp_path):
        times = np.linspace(0.0, 1.0, 11)
        ens = sto.PathEnsemble(
            times=times,
            paths=np.zeros((2, 11, 3)),
            controls=np.zeros((2, 10, 3)),
            seed=0,
            dt=0.1,
        )
        with pytest.raises(ValueError, match="scalar"):
            ens.save(tmp_path / "bad")
