"""Instrumental-variable estimators.

Exact small cases carry the correctness weight: the Wald ratio on four
hand-set group means, two-stage least squares on noiseless data, and
the summary-data regression on points lying exactly on a line.
"""

import numpy as np
import pytest

from causalcourse import ConfigError, DataError, DgpSpec, EstimationError, Frame, generate
from causalcourse.iv import MrSummary, mr_egger, tsls, wald_ratio


def cont(**cols):
    return Frame(
        data={k: np.asarray(v, dtype=float) for k, v in cols.items()},
        kinds={k: ("binary" if set(np.unique(v)) <= {0.0, 1.0} else "continuous") for k, v in cols.items()},
    )


def test_wald_ratio_is_group_mean_quotient():
    # means: a = 1 vs 0.6, y = 0.7 vs 0.5 -> (0.2 / 0.4) = 0.5
    fr = cont(
        z=[0, 0, 0, 0, 1, 1, 1, 1],
        a=[0.5, 0.7, 0.5, 0.7, 0.9, 1.1, 0.9, 1.1],
        y=[0.4, 0.6, 0.4, 0.6, 0.6, 0.8, 0.6, 0.8],
    )
    est = wald_ratio(fr, "z", "a", "y")
    assert est.components["effect"] == pytest.approx(0.5, abs=1e-12)
    assert est.diagnostics["numerator"] == pytest.approx(0.2, abs=1e-12)
    assert est.diagnostics["denominator"] == pytest.approx(0.4, abs=1e-12)


def iv_frame(n=4000, seed=0, noise_y=1.0, noise_a=1.0, confounded=True):
    rng = np.random.default_rng(seed)
    z = (rng.random(n) < 0.5).astype(float)
    u = rng.standard_normal(n) if confounded else np.zeros(n)
    a = 0.8 * z + 0.6 * u + noise_a * rng.standard_normal(n)
    y = 0.5 * a + 0.7 * u + noise_y * rng.standard_normal(n)
    return cont(z=z, a=a, y=y, u=u)


def test_wald_equals_tsls_for_single_binary_instrument():
    fr = iv_frame()
    w = wald_ratio(fr, "z", "a", "y")
    t = tsls(fr, ("z",), "a", "y")
    assert w.components["effect"] == pytest.approx(t.components["effect"], abs=1e-10)


def test_tsls_removes_confounding():
    fr = iv_frame(n=60_000, seed=1)
    est = tsls(fr, ("z",), "a", "y")
    assert est.components["effect"] == pytest.approx(0.5, abs=3 * est.se["effect"])
    assert not est.diagnostics["weak_instrument"]
    assert est.diagnostics["first_stage_F"] > 100


def test_tsls_noiseless_is_exact():
    fr = iv_frame(n=500, seed=2, noise_y=0.0, confounded=False)
    est = tsls(fr, ("z",), "a", "y")
    assert est.components["effect"] == pytest.approx(0.5, abs=1e-8)
    assert est.se["effect"] == pytest.approx(0.0, abs=1e-8)


def test_tsls_with_covariates_and_two_instruments():
    rng = np.random.default_rng(3)
    n = 30_000
    z1 = (rng.random(n) < 0.5).astype(float)
    z2 = rng.standard_normal(n)
    c = rng.standard_normal(n)
    u = rng.standard_normal(n)
    a = 0.5 * z1 + 0.4 * z2 + 0.3 * c + 0.6 * u + rng.standard_normal(n)
    y = 0.5 * a + 0.2 * c + 0.7 * u + rng.standard_normal(n)
    fr = cont(z1=z1, z2=z2, c=c, a=a, y=y)
    est = tsls(fr, ("z1", "z2"), "a", "y", covariates=("c",))
    assert est.components["effect"] == pytest.approx(0.5, abs=3 * est.se["effect"])
    assert est.diagnostics["first_stage_df"][0] == 2


def test_weak_instrument_flagged():
    fr = iv_frame(n=300, seed=4)
    weak = fr.with_columns({"zw": fr.column("z") * 0.0}, kinds={"zw": "binary"})
    rng = np.random.default_rng(5)
    zw = (rng.random(300) < 0.5).astype(float)
    # instrument unrelated to the exposure
    weak = fr.with_columns({"zw": zw}, kinds={"zw": "binary"})
    est = tsls(weak, ("zw",), "a", "y")
    assert est.diagnostics["weak_instrument"]
    assert est.diagnostics["first_stage_F"] < 10


def test_wald_validation():
    fr = iv_frame(n=100, seed=6)
    with pytest.raises(ConfigError):
        wald_ratio(fr, "z", "z", "y")
    with pytest.raises(DataError):
        wald_ratio(fr, "a", "z", "y")  # continuous instrument
    const_a = fr.with_columns({"ac": np.ones(100)}, kinds={"ac": "continuous"})
    with pytest.raises(EstimationError):
        wald_ratio(const_a, "z", "ac", "y")
    tiny = cont(z=[0, 1, 1, 1], a=[1.0, 2.0, 3.0, 4.0], y=[1.0, 2.0, 3.0, 4.0])
    with pytest.raises(DataError):
        wald_ratio(tiny, "z", "a", "y")


def test_tsls_validation():
    fr = iv_frame(n=50, seed=7)
    with pytest.raises(ConfigError):
        tsls(fr, (), "a", "y")
    with pytest.raises(ConfigError):
        tsls(fr, ("z",), "a", "y", covariates=("z",))


# ---------------------------------------------------------------------------
# summary-data regression


def exact_summary(slope=0.3, intercept=0.0, n=8):
    bx = np.linspace(0.05, 0.4, n)
    return MrSummary(
        beta_exposure=bx,
        se_exposure=np.full(n, 0.01),
        beta_outcome=intercept + slope * bx,
        se_outcome=np.full(n, 0.02),
    )


def test_egger_recovers_exact_line():
    est = mr_egger(exact_summary())
    assert est.components["slope"] == pytest.approx(0.3, abs=1e-10)
    assert est.components["intercept"] == pytest.approx(0.0, abs=1e-10)
    est2 = mr_egger(exact_summary(intercept=0.05))
    assert est2.components["slope"] == pytest.approx(0.3, abs=1e-10)
    assert est2.components["intercept"] == pytest.approx(0.05, abs=1e-10)
    assert est2.diagnostics["dispersion"] == 1.0  # floored on perfect fit


def test_egger_orientation_invariant():
    # flipping the reported sign of some variants must not move the fit
    s = exact_summary(intercept=0.02)
    flip = np.array([1, -1, 1, -1, -1, 1, 1, -1], dtype=float)
    flipped = MrSummary(
        beta_exposure=s.beta_exposure * flip,
        se_exposure=s.se_exposure,
        beta_outcome=s.beta_outcome * flip,
        se_outcome=s.se_outcome,
    )
    a = mr_egger(s)
    b = mr_egger(flipped)
    assert b.components["slope"] == pytest.approx(a.components["slope"], abs=1e-12)
    assert b.components["intercept"] == pytest.approx(a.components["intercept"], abs=1e-12)
    assert b.diagnostics["flipped_variants"] == 4


def test_egger_weights_by_outcome_precision():
    # one noisy variant pulled off the line should barely move the fit
    # when its se_outcome is large; the outlier sits away from the mean
    # exposure association so an unweighted fit visibly tilts
    bx = np.array([0.1, 0.2, 0.3, 0.4, 0.25])
    by = 0.3 * bx
    by[0] += 0.5
    se_small = np.full(5, 0.02)
    se_first_large = se_small.copy()
    se_first_large[0] = 2.0
    noisy = mr_egger(MrSummary(bx, se_small, by, se_first_large))
    assert noisy.components["slope"] == pytest.approx(0.3, abs=0.01)
    flat = mr_egger(MrSummary(bx, se_small, by, se_small))
    assert abs(flat.components["slope"] - 0.3) > 0.05


def test_egger_on_generated_summaries():
    fr = generate(DgpSpec(kind="mr_summary"), 200, 8)
    est = mr_egger(MrSummary.from_frame(fr))
    assert est.components["slope"] == pytest.approx(0.3, abs=3 * est.se["slope"])
    lo, hi = est.ci95["slope"]
    assert lo < est.components["slope"] < hi
    assert est.diagnostics["n_variants"] == 200


def test_summary_validation():
    ones = np.ones(5)
    with pytest.raises(DataError):
        MrSummary(ones, ones, ones[:4], ones)
    with pytest.raises(DataError):
        MrSummary(ones, 0.0 * ones, ones, ones)
    with pytest.raises(DataError):
        MrSummary(ones[:2], ones[:2], ones[:2], ones[:2])
    with pytest.raises(DataError):
        MrSummary(np.array([1.0, np.nan, 1.0]), ones[:3], ones[:3], ones[:3])
    with pytest.raises(DataError):
        mr_egger(MrSummary(np.array([0.0, 0.1, 0.2]), ones[:3], ones[:3], ones[:3]))


def test_summary_from_csv(tmp_path):
    path = tmp_path / "sumstats.csv"
    s = exact_summary()
    import pandas as pd

    pd.DataFrame(
        {
            "beta_exposure": s.beta_exposure,
            "se_exposure": s.se_exposure,
            "beta_outcome": s.beta_outcome,
            "se_outcome": s.se_outcome,
        }
    ).to_csv(path, index=False)
    loaded = MrSummary.from_csv(path)
    # the text round trip may wobble in the last bit; nothing more
    assert np.allclose(loaded.beta_exposure, s.beta_exposure, rtol=1e-15, atol=0.0)
    assert loaded.n_variants == s.n_variants
    with pytest.raises(DataError):
        MrSummary.from_csv(tmp_path / "missing.csv")
    bad = tmp_path / "bad.csv"
    bad.write_text("beta_exposure,se_exposure\n1,2\n")
    with pytest.raises(DataError):
        MrSummary.from_csv(bad)
