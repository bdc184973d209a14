import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holder_hj import holder_metrics as hm
from holder_hj import value_solver as vs
from holder_hj.envelope import NumericsWarning, derive_conjugates
from holder_hj.gallery import parabola_solution


def grid_from_profile(f, x_min=-1.0, x_max=1.0, nx=2001, nt=5):
    """GridFunction2D constant in t with profile f(x)."""
    x = np.linspace(x_min, x_max, nx)
    t = np.linspace(0.0, 1.0, nt)
    vals = np.tile(f(x), (nt, 1))
    return vs.GridFunction2D(x_grid=x, t_grid=t, values=vals)


FULL = ((-1.0, 1.0), (0.0, 1.0))


class TestHolderSeminorm:
    def test_absolute_value_is_lipschitz_one(self):
        u = grid_from_profile(np.abs)
        value = hm.holder_seminorm(u, 1.0, "space", FULL, (0.001, 0.5))
        assert value == pytest.approx(1.0, rel=1e-9)

    def test_square_root_profile(self):
        u = grid_from_profile(lambda x: np.sqrt(np.abs(x)))
        value = hm.holder_seminorm(u, 0.5, "space", FULL, (0.001, 0.5))
        assert value == pytest.approx(1.0, rel=0.02)

    def test_time_direction(self):
        x = np.linspace(0.0, 1.0, 11)
        t = np.linspace(0.0, 1.0, 101)
        vals = np.tile(2.0 * t[:, None], (1, 11))
        u = vs.GridFunction2D(x_grid=x, t_grid=t, values=vals)
        value = hm.holder_seminorm(u, 1.0, "time", ((0.0, 1.0), (0.0, 1.0)), (0.01, 0.5))
        assert value == pytest.approx(2.0, rel=1e-9)

    def test_parabola_solution_gradient(self):
        # space seminorm at alpha=1 matches sup |2x/(t-1)| on the smooth piece
        x = np.linspace(0.05, 0.5, 901)
        t = np.linspace(1.1, 2.0, 451)
        vals = np.stack([parabola_solution(x, tk) for tk in t])
        u = vs.GridFunction2D(x_grid=x, t_grid=t, values=vals)
        region = ((0.05, 0.5), (1.1, 2.0))
        value = hm.holder_seminorm(u, 1.0, "space", region, (u.dx, 3 * u.dx))
        expected = 2.0 / math.sqrt(0.1)  # sup of 2x/(t-1) subject to x^2 < t-1
        assert value == pytest.approx(expected, rel=0.05)

    @settings(max_examples=25, deadline=None)
    @given(st.floats(min_value=-5.0, max_value=5.0))
    def test_scaling(self, lam):
        u = grid_from_profile(lambda x: np.sqrt(np.abs(x)))
        scaled = vs.GridFunction2D(u.x_grid, u.t_grid, lam * u.values)
        base = hm.holder_seminorm(u, 0.5, "space", FULL, (0.01, 0.5))
        val = hm.holder_seminorm(scaled, 0.5, "space", FULL, (0.01, 0.5))
        assert val == pytest.approx(abs(lam) * base, rel=1e-12, abs=1e-12)

    def test_alpha_monotone_below_unit_scales(self):
        u = grid_from_profile(lambda x: np.sqrt(np.abs(x)))
        window = (0.01, 0.5)  # scales within (0, 1]
        values = [hm.holder_seminorm(u, a, "space", FULL, window) for a in (0.2, 0.5, 0.8, 1.0)]
        assert all(v1 <= v2 + 1e-12 for v1, v2 in zip(values, values[1:]))

    def test_empty_pairs_rejected(self):
        u = grid_from_profile(np.abs, nx=21)
        with pytest.raises(ValueError):
            hm.holder_seminorm(u, 1.0, "space", FULL, (1e-6, 1e-5))


class TestFitHolderExponent:
    @pytest.mark.parametrize("alpha", [0.2, 0.3, 0.5, 0.8, 1.0])
    def test_recovers_power_law(self, alpha):
        u = grid_from_profile(lambda x: np.abs(x) ** alpha, nx=4001)
        fit = hm.fit_holder_exponent(u, "space", FULL, (0.001, 0.3))
        assert fit.exponent == pytest.approx(alpha, abs=0.02)
        assert fit.fit_residual > 0.99

    def test_flags_non_power_law(self):
        # oscillation: max increments plateau at half a period, no power law
        u = grid_from_profile(lambda x: np.sin(40.0 * np.pi * x), nx=2001)
        with pytest.warns(NumericsWarning, match="non-power-law"):
            hm.fit_holder_exponent(u, "space", FULL, (0.001, 0.5))

    def test_needs_five_scales(self):
        u = grid_from_profile(np.abs, nx=31)
        with pytest.raises(ValueError, match="scales"):
            hm.fit_holder_exponent(u, "space", FULL, (0.05, 0.12))


class TestLipschitzConstant:
    def test_constant_zero(self):
        u = grid_from_profile(lambda x: np.full_like(x, 3.3), nx=101)
        assert hm.lipschitz_constant(u, "space", FULL) == 0.0

    def test_linear_exact(self):
        u = grid_from_profile(lambda x: 3.0 * x, nx=101)
        assert hm.lipschitz_constant(u, "space", FULL) == pytest.approx(3.0, rel=1e-12)


class TestTheoremExponents:
    def test_optimal_pair(self):
        space, time = hm.theorem_exponents(1.0 + math.sqrt(2.0), 2.0)
        assert space == pytest.approx(1.0 - 1.0 / math.sqrt(2.0), abs=1e-12)
        assert time == pytest.approx(3.0 - 2.0 * math.sqrt(2.0), abs=1e-12)

    def test_double_p(self):
        p = 1.7
        space, time = hm.theorem_exponents(2.0 * p, p)
        assert space == pytest.approx(p / (2.0 * p - 1.0))
        assert time == pytest.approx(0.5)

    def test_four_two(self):
        assert hm.theorem_exponents(4.0, 2.0) == pytest.approx((2.0 / 3.0, 0.5))

    def test_rejects_theta_below_p(self):
        with pytest.raises(ValueError):
            hm.theorem_exponents(2.0, 2.0)

    @given(
        st.floats(min_value=1.01, max_value=10.0),
        st.floats(min_value=0.01, max_value=10.0),
    )
    def test_ordering(self, p, gap):
        space, time = hm.theorem_exponents(p + gap, p)
        assert 0.0 < time < space < 1.0


class TestArcEnergyCheck:
    def test_quadratic_benchmark_linear_arc(self, quadratic_problem):
        u = vs.solve_value_function(quadratic_problem, 201, 201)
        arc = vs.extract_optimal_arc(u, quadratic_problem, (0.0, 0.0))
        env = derive_conjugates(2.0, 4.0)  # envelope of |z|^2/4 needs delta = 4
        report = hm.arc_energy_check(arc, u, env, slack=1.0, decay_window=(0.05, 1.0))
        # optimality chain: C_plus = 1/16 <= a = 1, so slack is far below 1
        assert 0.0 < report.toto1_min_slack <= 1.0 / 16.0 + 1e-6
        # constant speed: Jensen equality, margin = (C1 - 1) v^p + C0 >= 0
        assert report.revholder_worst_margin >= 0.0
        # linear arc: integral of |speed| is linear in the window
        assert report.decay_exponent == pytest.approx(1.0, abs=0.01)

    def test_constant_arc_trivial(self):
        problem = vs.VariationalProblem(
            a=lambda x, t: np.ones_like(np.asarray(x, dtype=float)),
            g=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
            a_floor=1.0,
            a_ceil=1.0,
        )
        u = vs.solve_value_function(problem, 51, 51)
        arc = vs.extract_optimal_arc(u, problem, (0.0, 0.0))
        env = derive_conjugates(2.0, 4.0)
        report = hm.arc_energy_check(arc, u, env)
        assert report.toto1_min_slack == 0.0
        assert report.revholder_worst_margin >= 0.0

    def test_rejects_mismatched_grid(self, quadratic_problem):
        u = vs.solve_value_function(quadratic_problem, 101, 101)
        arc = vs.DiscreteArc(times=np.linspace(0.0, 1.0, 7), positions=np.zeros(7))
        env = derive_conjugates(2.0, 4.0)
        with pytest.raises(ValueError, match="grid"):
            hm.arc_energy_check(arc, u, env)


class TestReportRows:
    def test_csv_schema(self, tmp_path):
        rows = [("lip", "x[-0.2,0.2]", 0.01, 0.2, 5.5, 1.25)]
        path = tmp_path / "report.csv"
        hm.report_rows_to_csv(rows, path)
        text = path.read_text().splitlines()
        assert text[0] == "check,region,scale_min,scale_max,value,margin"
        assert text[1].startswith("lip,x[-0.2,0.2],0.01,0.2,5.5,1.25")
