import math

import numpy as np
import pytest

from sqzphase.bounds import beyond_sql_interval, fisher_information, ocrb, optimal_phase
from sqzphase.errors import UninformativePosterior
from sqzphase.experiments import (
    default_thetas,
    jackknife_variance_stderr,
    posterior_curves,
    purity_scan,
    run_repeated,
    run_trial,
    stream_id,
    sweep_theta,
)
from sqzphase.state import VACUUM, SqueezedThermalState, from_db

from oracles import interval_by_scan

PURE = SqueezedThermalState(0.37)
STATE_A = from_db(3.21, 3.41)
PAPER_STATES = [from_db(3.21, 3.41), from_db(3.21, 4.23), from_db(4.95, 8.17), from_db(6.02, 10.96)]


class TestTrial:
    def test_vacuum_is_uninformative(self):
        with pytest.raises(UninformativePosterior):
            run_trial(VACUUM, 0.4, 100, seed=3)

    def test_near_truth(self):
        res = run_trial(PURE, 0.4, 1000, seed=1)
        assert abs(res.map_estimate - 0.4) < 3 * math.sqrt(1 / (1000 * fisher_information(PURE, 0.4)))

    def test_deterministic(self):
        assert run_trial(PURE, 0.4, 500, seed=9, stream=4) == run_trial(PURE, 0.4, 500, seed=9, stream=4)

    def test_stream_layout(self):
        assert stream_id(0, 0, 0) == 0
        assert stream_id(1, 2, 3) == (1 << 48) + (2 << 32) + 3
        with pytest.raises(ValueError):
            stream_id(0, 0, 1 << 32)


class TestRepeated:
    def test_jackknife_against_normal_theory(self):
        x = np.random.default_rng(1).normal(size=2000)
        assert jackknife_variance_stderr(x) == pytest.approx(math.sqrt(2 / 2000), rel=0.1)
        assert jackknife_variance_stderr([1.0, 2.0]) is None

    def test_estimators_agree(self):
        agg = run_repeated(SqueezedThermalState(0.6), 0.4, 1000, 200, seed=5)
        assert abs(agg.emp_var - agg.mean_post_var) < 3 * agg.stderr

    def test_attains_ocrb_at_optimum(self):
        agg = run_repeated(STATE_A, optimal_phase(STATE_A), 1000, 20, seed=21)
        assert 0.5 <= agg.emp_var / ocrb(STATE_A, 1000) <= 2.0
        assert agg.emp_var < agg.sql

    def test_worse_than_sql_outside_interval(self):
        agg = run_repeated(STATE_A, 0.05, 1000, 20, seed=22)
        assert agg.emp_var > agg.sql

    def test_single_repetition_has_no_variance(self):
        agg = run_repeated(PURE, 0.4, 100, 1, seed=2)
        assert agg.emp_var is None and agg.stderr is None

    def test_scaling_law_at_optimum(self):
        t = optimal_phase(PURE)
        aggs = {n: run_repeated(PURE, t, n, 50, seed=30) for n in (100, 300, 500, 1000)}
        c = np.mean([a.emp_var * n for n, a in aggs.items()])
        for n, a in aggs.items():
            assert abs(a.emp_var * n - c) <= 3 * a.stderr * n

    def test_higher_squeezing_wins(self):
        weak = run_repeated(SqueezedThermalState(0.37), 0.4, 1000, 20, seed=40)
        strong = run_repeated(SqueezedThermalState(0.69), 0.4, 1000, 20, seed=40)
        assert strong.mean_post_var < weak.mean_post_var


class TestSweep:
    def test_default_thetas(self):
        t = default_thetas()
        assert len(t) == 12 and t[0] > 0 and t[-1] < math.pi / 2
        np.testing.assert_allclose(np.diff(t), math.pi / 24)

    def test_beats_sql_only_near_interval(self):
        rep = sweep_theta(STATE_A, default_thetas(), 1000, 20, seed=50)
        iv = beyond_sql_interval(STATE_A)
        cell = math.pi / 24
        assert len(rep.aggregates) == 12 and len(rep.trials) == 240
        for a in rep.aggregates:
            if a.emp_var < a.sql:
                assert iv.theta_low - cell <= a.theta <= iv.theta_high + cell
            assert a.qcrb <= a.ocrb <= a.inv_nf

    def test_single_optimum(self):
        rep = sweep_theta(STATE_A, [optimal_phase(STATE_A)], 1000, 20, seed=51)
        (a,) = rep.aggregates
        assert 0.5 <= a.mean_post_var / a.ocrb <= 2.0

    @pytest.mark.parametrize("thetas", [[], [2.0], [-0.1]])
    def test_bad_theta_lists(self, thetas):
        with pytest.raises(ValueError):
            sweep_theta(STATE_A, thetas, 100, 2, seed=1)

    def test_parallel_matches_serial(self):
        serial = sweep_theta(STATE_A, default_thetas()[:4], 300, 8, seed=60)
        parallel = sweep_theta(STATE_A, default_thetas()[:4], 300, 8, seed=60, workers=4)
        assert serial == parallel

    def test_reps_are_independent(self):
        rep = sweep_theta(PURE, [0.4], 300, 5, seed=61)
        assert len({t.map_estimate for t in rep.trials}) == 5


class TestPurityScan:
    def test_theory_increases_with_purity(self):
        rows = purity_scan(PAPER_STATES, 1000, 2, seed=0, simulate=False)
        widths = [r.delta_theta_theory for r in sorted(rows, key=lambda r: r.purity)]
        assert np.all(np.diff(widths) > 0)
        assert rows[0].delta_theta_empirical is None

    def test_pure_state_theory_matches_scan(self):
        (row,) = purity_scan([PURE], 1000, 2, seed=0, simulate=False)
        lo, hi = interval_by_scan(PURE, fisher_information)
        assert row.delta_theta_theory == pytest.approx(hi - lo, abs=2e-4)

    def test_empirical_within_grid_resolution(self):
        (row,) = purity_scan([STATE_A], 1000, 100, seed=70)
        assert abs(row.delta_theta_empirical - row.delta_theta_theory) <= row.cell_width


class TestPosteriorCurves:
    def test_nested_records(self):
        curves = posterior_curves(PURE, 0.4, [100, 300, 500, 1000], seed=3)
        assert sorted(curves) == [100, 300, 500, 1000]
        peaks = [curves[n].density.max() for n in sorted(curves)]
        assert np.all(np.diff(peaks) > 0)
