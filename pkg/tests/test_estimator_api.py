"""Estimator-object facade conventions.

Every wrapper must satisfy the parameter contract (constructor args
stored verbatim, get_params/set_params/clone round trips) and produce
the same numbers as the functional core it delegates to.
"""

import numpy as np
import pytest
from sklearn.base import clone

from causalcourse import BootstrapPlan, ConfigError, DgpSpec, Frame, generate
from causalcourse import effects, iv, twin
from causalcourse.estimators import (
    BetweenWithinEffect,
    ColumnStandardizer,
    ControlledDirectEffect,
    DisparityMeasure,
    EggerRegression,
    GrowthFeatureExtractor,
    InterventionalEffect,
    LifecourseClassifier,
    MultiMediatorEffect,
    NaiveTwinEffect,
    TotalEffect,
    TwoStageIV,
    WaldRatioIV,
)
from causalcourse.regression import ModelSpec

ALL_ESTIMATORS = [
    TotalEffect(),
    ControlledDirectEffect(),
    InterventionalEffect(),
    MultiMediatorEffect(),
    DisparityMeasure(),
    LifecourseClassifier(),
    NaiveTwinEffect(),
    BetweenWithinEffect(),
    WaldRatioIV(),
    TwoStageIV(),
    EggerRegression(),
    ColumnStandardizer(),
    GrowthFeatureExtractor(),
]


@pytest.mark.parametrize("est", ALL_ESTIMATORS, ids=lambda e: type(e).__name__)
def test_params_round_trip(est):
    params = est.get_params()
    est.set_params(**params)
    twin_copy = clone(est)
    assert twin_copy.get_params() == params
    assert type(twin_copy) is type(est)


def test_set_params_rejects_unknown():
    with pytest.raises(ValueError):
        TotalEffect().set_params(not_a_param=1)


def chain():
    return generate(DgpSpec(kind="linear_chain"), 3000, 0)


def test_total_effect_matches_functional_core():
    fr = chain()
    est = TotalEffect(
        exposure="a1", outcome_formula="y ~ 1 + a1 + c", confounders=("c",)
    ).fit(fr)
    req = effects.EstimandRequest(
        kind="tce", exposure="a1",
        outcome_model=ModelSpec.from_formula("y ~ 1 + a1 + c"),
        confounders=("c",),
    )
    want = effects.estimate(req, fr)
    assert est.components_ == want.components
    assert est.fit(fr) is est


def test_total_effect_bootstrap_plan():
    fr = generate(DgpSpec(kind="linear_chain"), 800, 1)
    est = TotalEffect(
        exposure="a1", outcome_formula="y ~ 1 + a1 + c", confounders=("c",),
        bootstrap=BootstrapPlan(replicates=40, seed=5),
    ).fit(fr)
    assert "TCE" in est.estimate_.se
    with pytest.raises(ConfigError):
        TotalEffect(
            exposure="a1", outcome_formula="y ~ 1 + a1 + c", confounders=("c",),
            bootstrap="yes please",
        ).fit(fr)


def test_cde_estimator():
    fr = chain()
    est = ControlledDirectEffect(
        exposure="a1", mediator="a2", fixed_values=(0.0, 1.0),
        outcome_formula="y ~ 1 + a1 + c + a2 + a1:a2", confounders=("c",),
    ).fit(fr)
    assert set(est.components_) == {"CDE(0)", "CDE(1)"}


def test_interventional_estimator_seeded():
    fr = generate(DgpSpec(kind="three_node"), 2000, 2)
    kw = dict(
        exposure="a", mediators=("m",), mediator_formulas=("m ~ 1 + a",),
        outcome_formula="y ~ 1 + a + m", draws=30,
    )
    a = InterventionalEffect(seed=7, **kw).fit(fr).components_
    b = InterventionalEffect(seed=7, **kw).fit(fr).components_
    assert a == b
    assert set(a) == {"IDE", "IIE", "total"}


def test_multi_mediator_estimator():
    fr = generate(DgpSpec(kind="parallel_mediators"), 3000, 3)
    est = MultiMediatorEffect(
        exposure="a", mediator_blocks=(("m1",), ("m2",)),
        mediator_formulas=("m1 ~ 1 + a", "m2 ~ 1 + a + m1"),
        outcome_formula="y ~ 1 + a + m1 + m2", draws=30, seed=4,
    ).fit(fr)
    assert {"IDE", "IIE_1", "IIE_2", "IIE_all", "TCE", "remainder"} <= set(est.components_)


def test_disparity_estimator():
    rng = np.random.default_rng(5)
    n = 1500
    a = (rng.random(n) < 0.5).astype(float)
    m = 0.5 * a + rng.standard_normal(n)
    y = 0.3 * a + 0.4 * m + rng.standard_normal(n)
    fr = Frame(
        data={"a": a, "m": m, "y": y},
        kinds={"a": "binary", "m": "continuous", "y": "continuous"},
    )
    est = DisparityMeasure(
        exposure="a", mediator="m", fixed_values=(0.0,),
        outcome_formula="y ~ 1 + a + m",
    ).fit(fr)
    assert "CDM(0)" in est.components_


def test_lifecourse_classifier():
    fr = generate(DgpSpec(kind="lifecourse", params={"b1": 0.0, "b2": 0.4}), 4000, 6)
    est = LifecourseClassifier(a1="a1", a2="a2", outcome="y").fit(fr)
    assert est.classification_ == "critical_2"
    assert est.verdict_.classification == est.classification_


def test_twin_estimators():
    fr = generate(DgpSpec(kind="twin_pairs"), 2000, 7)
    tf = twin.TwinFrame(fr, exposure="x", outcome="y")
    naive = NaiveTwinEffect().fit(tf)
    bw = BetweenWithinEffect().fit(tf)
    assert naive.components_["effect"] == twin.naive_clustered(tf).components["effect"]
    assert bw.components_["beta_within"] == twin.between_within(tf).components["beta_within"]


def test_iv_estimators():
    rng = np.random.default_rng(8)
    n = 2000
    z = (rng.random(n) < 0.5).astype(float)
    a = 0.8 * z + rng.standard_normal(n)
    y = 0.5 * a + rng.standard_normal(n)
    fr = Frame(
        data={"z": z, "a": a, "y": y},
        kinds={"z": "binary", "a": "continuous", "y": "continuous"},
    )
    w = WaldRatioIV(instrument="z", exposure="a", outcome="y").fit(fr)
    t = TwoStageIV(instruments=("z",), exposure="a", outcome="y").fit(fr)
    assert w.components_["effect"] == pytest.approx(t.components_["effect"], abs=1e-10)


def test_egger_estimator_accepts_frame_or_summary():
    fr = generate(DgpSpec(kind="mr_summary"), 50, 9)
    via_frame = EggerRegression().fit(fr)
    via_summary = EggerRegression().fit(iv.MrSummary.from_frame(fr))
    assert via_frame.components_ == via_summary.components_
    with pytest.raises(Exception):
        EggerRegression().fit([1, 2, 3])


def test_standardizer_round_trip():
    fr = chain()
    std = ColumnStandardizer(columns=("y", "c")).fit(fr)
    out = std.transform(fr)
    assert abs(float(np.mean(out.column("y")))) < 1e-12
    assert float(np.std(out.column("y"), ddof=1)) == pytest.approx(1.0, abs=1e-12)
    back = std.inverse_transform(out)
    assert np.allclose(back.column("y"), fr.column("y"), atol=1e-12)
    # untouched columns pass through
    assert np.array_equal(out.column("a1"), fr.column("a1"))


def test_standardizer_applies_fit_statistics_to_new_data():
    fr = chain()
    other = generate(DgpSpec(kind="linear_chain"), 500, 10)
    std = ColumnStandardizer(columns=("y",)).fit(fr)
    out = std.transform(other)
    mean, sd = std.report_.means[0], std.report_.sds[0]
    assert np.allclose(out.column("y"), (other.column("y") - mean) / sd, atol=1e-12)


def test_growth_extractor():
    fr = Frame(
        data={"m1": np.array([7.0, 9.0]), "m2": np.array([10.0, 12.0])},
        kinds={"m1": "continuous", "m2": "continuous"},
    )
    ext = GrowthFeatureExtractor(measure_cols=("m1", "m2"), ages=(6.0, 9.0), centering_age=9.0)
    out = ext.fit(fr).transform(fr)
    assert np.allclose(out.column("size"), [10.0, 12.0])
    assert np.allclose(out.column("velocity"), [1.0, 1.0])
    assert ext.features_.n_points == 2
