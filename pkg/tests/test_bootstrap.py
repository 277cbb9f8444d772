"""Resampling engine: determinism, SE calibration, failure budget."""

import numpy as np
import pytest

from causalcourse import (
    BootstrapAbort,
    BootstrapPlan,
    ConfigError,
    DataError,
    EstimationError,
    Frame,
    bootstrap,
    derive_seed,
)


def mean_stat(frame, seed):
    return {"mean": float(np.mean(frame.column("x")))}


def gaussian_frame(n=400, seed=0, sd=2.0):
    rng = np.random.default_rng(seed)
    return Frame(data={"x": rng.normal(0.0, sd, n)}, kinds={"x": "continuous"})


def test_constant_statistic_collapses():
    fr = gaussian_frame(50)
    plan = BootstrapPlan(replicates=100, seed=1)
    res = bootstrap(plan, fr, lambda f, s: {"c": 0.5})
    assert res.se["c"] == 0.0
    assert res.ci95["c"] == (0.5, 0.5)
    assert res.point["c"] == 0.5


def test_mean_se_matches_theory():
    n, sd = 400, 2.0
    fr = gaussian_frame(n=n, seed=3, sd=sd)
    sample_sd = float(np.std(fr.column("x"), ddof=1))
    plan = BootstrapPlan(replicates=800, seed=5)
    res = bootstrap(plan, fr, mean_stat)
    assert res.se["mean"] == pytest.approx(sample_sd / np.sqrt(n), rel=0.15)


def test_cluster_design_effect():
    # rows duplicated within clusters: the iid bootstrap sees 2n fake
    # observations, the cluster bootstrap recovers the true uncertainty
    rng = np.random.default_rng(8)
    n = 300
    x = rng.normal(0.0, 1.0, n)
    doubled = np.repeat(x, 2)
    fr = Frame(
        data={"x": doubled},
        kinds={"x": "continuous"},
        cluster_id=np.repeat(np.arange(n), 2),
    )
    iid = bootstrap(BootstrapPlan(replicates=600, seed=2, mode="iid"), fr, mean_stat)
    cl = bootstrap(BootstrapPlan(replicates=600, seed=2, mode="cluster"), fr, mean_stat)
    assert cl.se["mean"] / iid.se["mean"] == pytest.approx(np.sqrt(2.0), rel=0.15)


def test_cluster_mode_requires_labels():
    fr = gaussian_frame(20)
    with pytest.raises(DataError):
        bootstrap(BootstrapPlan(replicates=10, mode="cluster"), fr, mean_stat)


def test_replicate_frames_get_fresh_cluster_labels():
    fr = Frame(
        data={"x": np.arange(8.0)},
        kinds={"x": "continuous"},
        cluster_id=np.repeat(np.arange(4), 2),
    )

    def stat(frame, seed):
        ids, counts = np.unique(frame.cluster_id, return_counts=True)
        assert len(ids) == 4 and np.all(counts == 2)
        return {"ok": 1.0}

    bootstrap(BootstrapPlan(replicates=50, mode="cluster", seed=7), fr, stat)


def test_determinism():
    fr = gaussian_frame(100, seed=1)
    plan = BootstrapPlan(replicates=200, seed=42)
    a = bootstrap(plan, fr, mean_stat)
    b = bootstrap(plan, fr, mean_stat)
    assert a.se == b.se
    assert a.ci95 == b.ci95
    np.testing.assert_array_equal(a.replicates["mean"], b.replicates["mean"])
    c = bootstrap(BootstrapPlan(replicates=200, seed=43), fr, mean_stat)
    assert a.se != c.se


def test_statistic_seeds_are_replicate_specific():
    fr = gaussian_frame(30)
    seen = []

    def stat(frame, seed):
        seen.append(seed)
        return {"v": 0.0}

    bootstrap(BootstrapPlan(replicates=20, seed=9), fr, stat)
    assert len(set(seen)) == len(seen)
    assert seen[0] == derive_seed(9, 2)  # the point evaluation comes first
    assert seen[1] == derive_seed(9, 1, 0)


def test_failure_budget_aborts():
    fr = gaussian_frame(50)
    calls = {"n": 0}

    def flaky(frame, seed):
        calls["n"] += 1
        if calls["n"] > 1:  # point estimate succeeds, replicates all fail
            raise EstimationError("boom")
        return {"v": 1.0}

    with pytest.raises(BootstrapAbort):
        bootstrap(BootstrapPlan(replicates=100, seed=0), fr, flaky)


def test_occasional_failures_tolerated():
    fr = gaussian_frame(50)
    calls = {"n": 0}

    def mostly_fine(frame, seed):
        calls["n"] += 1
        if calls["n"] % 25 == 0:
            raise EstimationError("rare failure")
        return {"mean": float(np.mean(frame.column("x")))}

    res = bootstrap(BootstrapPlan(replicates=100, seed=0), fr, mostly_fine)
    assert res.n_failed > 0
    assert res.n_used + res.n_failed == 100


def test_percentile_interval_brackets_point():
    fr = gaussian_frame(200, seed=4)
    res = bootstrap(BootstrapPlan(replicates=400, seed=6), fr, mean_stat)
    lo, hi = res.ci95["mean"]
    assert lo < res.point["mean"] < hi
    assert lo == pytest.approx(float(np.quantile(res.replicates["mean"], 0.025)), abs=0.01)


def test_normal_interval_centered_on_point():
    fr = gaussian_frame(200, seed=4)
    res = bootstrap(
        BootstrapPlan(replicates=400, seed=6, ci="normal"), fr, mean_stat
    )
    lo, hi = res.ci95["mean"]
    assert (lo + hi) / 2 == pytest.approx(res.point["mean"], abs=1e-12)
    assert hi - lo == pytest.approx(2 * 1.959963984540054 * res.se["mean"], rel=1e-9)


def test_plan_validation():
    with pytest.raises(ConfigError):
        BootstrapPlan(mode="jackknife")
    with pytest.raises(ConfigError):
        BootstrapPlan(ci="bca")
    with pytest.raises(ConfigError):
        BootstrapPlan(replicates=1)
    with pytest.raises(ConfigError):
        BootstrapPlan(seed=-1)


def test_empty_statistic_rejected():
    fr = gaussian_frame(10)
    with pytest.raises(ConfigError):
        bootstrap(BootstrapPlan(replicates=10), fr, lambda f, s: {})


def test_derive_seed_paths_distinct():
    seeds = {derive_seed(7, i, j) for i in range(3) for j in range(50)}
    assert len(seeds) == 150
