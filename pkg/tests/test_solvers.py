import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from secgame.experiments import ScenarioSpec, gen_scenario, mix_seed
from secgame.game import ResourceLimitError, best_response, max_deviation_gain
from secgame.secrecy import (
    ChannelGains,
    SecrecyScenario,
    channel_secrecy_rate,
    secrecy_rate_gradient,
    sum_secrecy_rate,
)
from secgame.solvers import (
    PricingGame,
    SolverConfig,
    nash_certificate,
    price_best_response,
    project_simplex,
    solve,
    solve_epr,
    solve_expert,
    solve_game,
    solve_grid_oracle,
    solve_projected_gradient,
)


def scenario(n, seed, nonneg=True, **kw):
    return gen_scenario(ScenarioSpec(n, mix_seed(77, n, seed), nonneg_baseline=nonneg, **kw))


def symmetric(n, g=(900.0, 300.0, 600.0)):
    return SecrecyScenario.from_arrays([g[0]] * n, [g[1]] * n, [g[2]] * n)


def grid_two_channel(sc, steps):
    """Independent N=2 oracle: scan p_0 over the budget with scalar math."""
    best = -math.inf
    for k in range(steps + 1):
        p0 = k * sc.p_total_w / steps
        val = sum(
            channel_secrecy_rate(sc, i, p, clipped=False)
            for i, p in enumerate((p0, sc.p_total_w - p0))
        )
        best = max(best, val)
    return best


class TestEPR:
    def test_reference_power_settings(self):
        sc = gen_scenario(ScenarioSpec(5, 1))
        np.testing.assert_allclose(solve_epr(sc).alloc, [0.01] * 5, rtol=0, atol=1e-18)

    def test_single_channel(self):
        assert solve_epr(scenario(1, 0)).alloc.tolist() == [0.05]

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 8])
    def test_spends_budget(self, n):
        r = solve_epr(scenario(n, 1))
        assert r.alloc.sum() == pytest.approx(0.05, rel=1e-15)
        assert r.converged and r.rounds_used == 0


class TestPriceBestResponse:
    def test_no_jamming_effect(self):
        assert price_best_response(ChannelGains(5, 5, 0), 0.3, 0.01, 1.0) == 0.0
        assert price_best_response(ChannelGains(5, 0, 5), 0.3, 0.01, 1.0) == 0.0

    def test_price_above_marginal_at_zero(self):
        g = ChannelGains(1000.0, 500.0, 800.0)
        marginal0 = 800 * (1 / 1 - 1 / 6) / math.log(2)
        assert price_best_response(g, marginal0, 0.01, 1.0) == 0.0
        assert price_best_response(g, 2 * marginal0, 0.01, 1.0) == 0.0

    def test_quadratic_example_against_grid(self):
        # (1 + 800p)(6 + 800p) = 24 has root p = 0.0025
        g = ChannelGains(1000.0, 500.0, 800.0)
        price = 800 * 5 / (24 * math.log(2))
        p = price_best_response(g, price, 0.01, 1.0)
        assert p == pytest.approx(0.0025, rel=1e-12)

        sc = SecrecyScenario((g,), 0.05, 0.01, 1.0)
        grid = np.arange(0, 100_001) * 1e-7
        util = [channel_secrecy_rate(sc, 0, x, False) - price * x for x in grid]
        assert abs(grid[int(np.argmax(util))] - p) <= 1e-7

    def test_rejects_nonpositive_price(self):
        with pytest.raises(ValueError):
            price_best_response(ChannelGains(1, 1, 1), 0.0, 0.01, 1.0)

    @settings(max_examples=100, deadline=None)
    @given(g_e=st.floats(1.0, 1e4), g_j=st.floats(1.0, 1e4), price=st.floats(1e-2, 1e3))
    def test_first_order_condition(self, g_e, g_j, price):
        g = ChannelGains(1.0, g_e, g_j)
        p = price_best_response(g, price, 0.01, 1.0)
        sc = SecrecyScenario((g,), 1e9, 0.01, 1.0)
        slope = secrecy_rate_gradient(sc, [p])[0]
        if p > 0:
            assert slope == pytest.approx(price, rel=1e-8)
        else:
            assert slope <= price * (1 + 1e-12)


class TestPricingGame:
    def test_closed_form_matches_search(self):
        sc = scenario(4, 3)
        pg = PricingGame(sc, 40.0)
        closed = pg.as_game()
        searched = pg.as_game(closed_form=False)
        prof = (0.01,) * 4
        for i in range(4):
            a = best_response(closed, prof, i)
            b = best_response(searched, prof, i, tol=1e-13)
            assert a == pytest.approx(b, abs=1e-9)

    def test_rejects_negative_price(self):
        with pytest.raises(ValueError):
            PricingGame(scenario(2, 0), -1.0)


class TestExpert:
    def test_single_channel(self):
        r = solve_expert(scenario(1, 4))
        assert r.alloc.tolist() == [0.05]
        assert r.converged

    @pytest.mark.parametrize("n", [2, 3, 5, 8])
    def test_symmetric_channels(self, n):
        r = solve_expert(symmetric(n))
        np.testing.assert_allclose(r.alloc, 0.05 / n, rtol=1e-8)

    @pytest.mark.parametrize("seed", range(6))
    def test_matches_two_channel_grid(self, seed):
        sc = scenario(2, seed, nonneg=False)
        r = solve_expert(sc)
        oracle = grid_two_channel(sc, 2000)
        assert abs(r.sum_rate_surrogate - oracle) <= 2e-3
        assert r.sum_rate_surrogate >= oracle - 1e-9

    def test_budget_tolerance(self):
        for seed in range(10):
            r = solve_expert(scenario(6, seed), tol=1e-9)
            assert 0.05 - r.alloc.sum() <= 1e-9 * 0.05
            assert r.alloc.sum() <= 0.05

    def test_kkt_conditions(self):
        sc = scenario(7, 2)
        r = solve_expert(sc)
        g = secrecy_rate_gradient(sc, r.alloc)
        active = r.alloc > 0
        np.testing.assert_allclose(g[active], r.final_price, rtol=1e-7)
        assert np.all(g[~active] <= r.final_price * (1 + 1e-9))

    def test_degenerate(self):
        sc = SecrecyScenario.from_arrays([5, 6], [0, 3], [4, 0])
        r = solve_expert(sc)
        assert r.degenerate
        np.testing.assert_allclose(r.alloc, [0.025, 0.025])

    def test_zero_power_to_ineffective_channel(self):
        sc = SecrecyScenario.from_arrays([900, 900, 900], [300, 0, 300], [600, 600, 0])
        r = solve_expert(sc)
        assert r.alloc[1] == 0.0 and r.alloc[2] == 0.0
        assert r.alloc[0] == pytest.approx(0.05, rel=1e-9)


class TestGame:
    def test_single_channel(self):
        r = solve_game(scenario(1, 5))
        assert r.alloc.tolist() == [0.05]
        assert r.rounds_used == 1 and r.converged

    @pytest.mark.parametrize("n", [2, 4, 7])
    def test_symmetric_matches_epr(self, n):
        sc = symmetric(n)
        np.testing.assert_allclose(solve_game(sc).alloc, solve_epr(sc).alloc, rtol=1e-8)

    @pytest.mark.parametrize("seed", range(20))
    def test_matches_expert(self, seed):
        sc = scenario(2 + seed % 7, seed)
        g, e = solve_game(sc), solve_expert(sc)
        assert g.converged
        assert abs(g.sum_rate_surrogate - e.sum_rate_surrogate) <= 1e-6

    @pytest.mark.parametrize("seed", range(5))
    def test_nash_certificate(self, seed):
        sc = scenario(5, seed)
        r = solve_game(sc)
        assert nash_certificate(r, sc) <= 1e-9
        game = PricingGame(sc, r.final_price).as_game()
        assert max_deviation_gain(game, r.alloc, 1e-12) <= 1e-12

    @pytest.mark.parametrize("seed", range(5))
    def test_trajectory_nondecreasing(self, seed):
        r = solve_game(scenario(6, seed))
        vals = [v for _, v in r.trajectory]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
        assert [k for k, _ in r.trajectory] == list(range(1, len(vals) + 1))

    def test_best_response_rounds_monotone_in_potential(self):
        # within one price, round-robin updates never lower the potential
        sc = scenario(5, 1)
        pg = PricingGame(sc, 60.0)
        prof = [0.0] * 5
        last = pg.potential(prof)
        for i in range(5):
            prof[i] = pg.best_response(i)
            now = pg.potential(prof)
            assert now >= last - 1e-12
            last = now

    def test_deterministic(self):
        sc = scenario(6, 11)
        a, b = solve_game(sc), solve_game(sc)
        assert a.to_dict() == b.to_dict()
        assert a.trajectory == b.trajectory
        assert a.alloc.tobytes() == b.alloc.tobytes()

    def test_outer_limit_reports_nonconvergence(self):
        r = solve_game(scenario(5, 2), SolverConfig(max_outer=3))
        assert not r.converged
        assert r.rounds_used == 3
        assert r.alloc.sum() <= 0.05


class TestGridOracle:
    def test_single_channel(self):
        assert solve_grid_oracle(scenario(1, 0), 50).alloc.tolist() == [0.05]

    def test_too_many_channels(self):
        with pytest.raises(ResourceLimitError):
            solve_grid_oracle(scenario(4, 0), 10)

    @pytest.mark.parametrize("seed", range(4))
    def test_matches_expert(self, seed):
        sc = scenario(2, seed)
        g = solve_grid_oracle(sc, 2000)
        e = solve_expert(sc)
        assert abs(g.sum_rate_clipped - e.sum_rate_clipped) <= 2e-3

    @pytest.mark.parametrize("n", [2, 3])
    def test_refinement_never_worse(self, n):
        sc = scenario(n, 3, nonneg=False)
        vals = [solve_grid_oracle(sc, r).sum_rate_clipped for r in (25, 50, 100, 200)]
        assert vals == sorted(vals)

    def test_three_channels_close_to_expert(self):
        sc = scenario(3, 8)
        assert solve_grid_oracle(sc, 400).sum_rate_clipped == pytest.approx(
            solve_expert(sc).sum_rate_clipped, abs=1e-2)

    def test_lexicographic_ties(self):
        # identical channels: every split ties only if jamming is useless
        sc = SecrecyScenario.from_arrays([9, 9], [0, 0], [1, 1])
        assert solve_grid_oracle(sc, 10).alloc.tolist() == [0.0, 0.05]


class TestProjectSimplex:
    def test_feasible_point_unchanged(self):
        v = np.array([0.01, 0.02, 0.02])
        np.testing.assert_allclose(project_simplex(v, 0.05), v, atol=1e-15)

    def test_two_variable_example(self):
        np.testing.assert_allclose(project_simplex([0.1, 0.0], 0.05), [0.05, 0.0],
                                   atol=1e-15)

    def test_rejects_bad_budget(self):
        with pytest.raises(ValueError):
            project_simplex([1.0], 0.0)

    @settings(max_examples=200, deadline=None)
    @given(v=st.lists(st.floats(-10, 10), min_size=1, max_size=12),
           budget=st.floats(1e-3, 10))
    def test_feasible_and_optimal(self, v, budget):
        v = np.array(v)
        p = project_simplex(v, budget)
        assert np.all(p >= 0)
        assert p.sum() == pytest.approx(budget, abs=1e-12 * max(1.0, budget) * len(v))
        # optimality: v - p is constant on the support and no larger off it
        resid = v - p
        theta = resid[p > 0]
        assert np.ptp(theta) <= 1e-9 * (1 + np.abs(v).max())
        assert np.all(resid[p == 0] <= theta.min() + 1e-9 * (1 + np.abs(v).max()))


class TestProjectedGradient:
    def test_single_channel(self):
        r = solve_projected_gradient(scenario(1, 0), 5e-5, 1)
        assert r.alloc.tolist() == [0.05]

    def test_symmetric_fixed_point(self):
        sc = symmetric(4)
        r = solve_projected_gradient(sc, 5e-5, 50)
        np.testing.assert_allclose(r.alloc, 0.0125, rtol=1e-12)

    @pytest.mark.parametrize("seed", range(3))
    def test_reaches_expert(self, seed):
        sc = scenario(3 + seed, seed)
        r = solve_projected_gradient(sc, 1e-3 * sc.p_total_w, 10_000)
        assert abs(r.sum_rate_surrogate - solve_expert(sc).sum_rate_surrogate) <= 1e-4


class TestDispatch:
    def test_unknown_method(self):
        with pytest.raises(ValueError):
            solve(scenario(2, 0), "maddpg")

    @pytest.mark.parametrize("method", ["epr", "expert", "game", "grid", "pga"])
    def test_every_method_feasible(self, method):
        sc = scenario(3, 4, nonneg=False)
        cfg = SolverConfig(grid_resolution=100, pga_iters=200)
        r = solve(sc, method, cfg)
        assert r.method == method
        assert np.all(r.alloc >= 0)
        assert r.alloc.sum() <= sc.p_total_w * (1 + 1e-9)
        assert r.sum_rate_clipped == pytest.approx(sum_secrecy_rate(sc, r.alloc))

    @pytest.mark.parametrize("seed", range(10))
    def test_ordering_on_nonneg_baseline(self, seed):
        sc = scenario(2 + seed % 9, seed)
        epr, game, expert = (solve(sc, m).sum_rate_clipped for m in ("epr", "game", "expert"))
        assert expert >= game - 1e-9
        assert game >= epr - 1e-9
