"""Two-period effect classification.

The decision table is tested directly on hand-built summaries, the
nested-model route on strong-signal synthetic data where the intended
label is unambiguous, and the estimand route on trivial point/interval
patterns whose answer can be read off by eye.
"""

import numpy as np
import pytest

from causalcourse import ConfigError, DataError, DgpSpec, Frame, generate
from causalcourse.lifecourse import (
    CRITICAL_1,
    CRITICAL_2,
    CUMULATIVE,
    NULL,
    PATHWAY,
    SENSITIVE_1,
    SENSITIVE_2,
    attach_estimand_evidence,
    classify_by_estimands,
    compare_nested,
    derive_label,
)


def decision(**kw):
    base = {
        "alpha": 0.05,
        "p_synergy": 0.5,
        "b1": 0.3,
        "b2": 0.3,
        "p1": 0.5,
        "p2": 0.5,
        "p_equal": 0.5,
    }
    base.update(kw)
    return base


def test_decision_table_covers_all_labels():
    assert derive_label(decision(p_synergy=0.01), 0.05) == PATHWAY
    assert derive_label(decision(p1=0.001, p2=0.001), 0.05) == CUMULATIVE
    assert derive_label(decision(p1=0.001, p2=0.001, p_equal=0.001, b1=0.5, b2=0.1), 0.05) == SENSITIVE_1
    assert derive_label(decision(p1=0.001, p2=0.001, p_equal=0.001, b1=0.1, b2=0.5), 0.05) == SENSITIVE_2
    assert derive_label(decision(p1=0.001), 0.05) == CRITICAL_1
    assert derive_label(decision(p2=0.001), 0.05) == CRITICAL_2
    assert derive_label(decision(), 0.05) == NULL


def test_interaction_screens_first():
    # a significant interaction wins even when the additive tests would
    # also fire
    d = decision(p_synergy=0.001, p1=0.001, p2=0.001, p_equal=0.001)
    assert derive_label(d, 0.05) == PATHWAY


def two_period_frame(b1, b2, b3, n=3000, seed=0, noise=0.3):
    rng = np.random.default_rng(seed)
    a1 = rng.standard_normal(n)
    a2 = 0.4 * a1 + np.sqrt(1 - 0.16) * rng.standard_normal(n)
    c = rng.standard_normal(n)
    y = b1 * a1 + b2 * a2 + b3 * a1 * a2 + 0.2 * c + noise * rng.standard_normal(n)
    return Frame(
        data={"a1": a1, "a2": a2, "c": c, "y": y},
        kinds={k: "continuous" for k in ("a1", "a2", "c", "y")},
    )


@pytest.mark.parametrize(
    "b1,b2,b3,label",
    [
        (0.3, 0.3, 0.0, CUMULATIVE),
        (0.4, 0.0, 0.0, CRITICAL_1),
        (0.0, 0.4, 0.0, CRITICAL_2),
        (0.5, 0.1, 0.0, SENSITIVE_1),
        (0.1, 0.5, 0.0, SENSITIVE_2),
        (0.2, 0.2, 0.25, PATHWAY),
    ],
)
def test_nested_route_recovers_strong_signals(b1, b2, b3, label):
    fr = two_period_frame(b1, b2, b3)
    verdict = compare_nested(fr, "a1", "a2", "y", confounders=("c",))
    assert verdict.classification == label


def test_null_data_classified_null():
    fr = two_period_frame(0.0, 0.0, 0.0, seed=7)
    assert compare_nested(fr, "a1", "a2", "y").classification == NULL


def test_verdict_rederivable_from_stored_decision():
    fr = two_period_frame(0.3, 0.3, 0.0, seed=3)
    verdict = compare_nested(fr, "a1", "a2", "y", confounders=("c",), alpha=0.01)
    assert derive_label(verdict.decision, verdict.decision["alpha"]) == verdict.classification
    assert verdict.decision["alpha"] == 0.01


def test_submodel_tests_reported():
    fr = two_period_frame(0.3, 0.3, 0.0, seed=4)
    verdict = compare_nested(fr, "a1", "a2", "y")
    assert set(verdict.submodel_tests) == {"no_synergy", "cumulative", "critical_1", "critical_2"}
    for t in verdict.submodel_tests.values():
        assert t.statistic >= 0.0
        assert 0.0 <= t.p_value <= 1.0
    # equal-coefficient data should not reject the shared-slope submodel
    assert verdict.submodel_tests["cumulative"].p_value > 0.05
    assert verdict.submodel_tests["critical_1"].p_value < 1e-6


def test_verdict_as_dict_shape():
    fr = two_period_frame(0.3, 0.3, 0.0, seed=5)
    doc = compare_nested(fr, "a1", "a2", "y").as_dict()
    assert doc["classification"] == CUMULATIVE
    assert "a1:a2" in doc["coefficients"]
    assert "estimand_evidence" not in doc
    assert doc["decision"]["p_synergy"] == doc["submodel_tests"]["no_synergy"]["p_value"]


def test_matches_generator_truth():
    spec = DgpSpec(kind="lifecourse", params={"b1": 0.0, "b2": 0.4, "b3": 0.0})
    fr = generate(spec, 5000, 11)
    assert compare_nested(fr, "a1", "a2", "y").classification == CRITICAL_2


def test_compare_nested_validation():
    fr = two_period_frame(0.3, 0.3, 0.0, n=100)
    with pytest.raises(ConfigError):
        compare_nested(fr, "a1", "a2", "y", alpha=0.0)
    with pytest.raises(ConfigError):
        compare_nested(fr, "a1", "a1", "y")
    binary = fr.with_columns(
        {"yb": (fr.column("y") > 0).astype(float)}, kinds={"yb": "binary"}
    )
    with pytest.raises(DataError):
        compare_nested(binary, "a1", "a2", "yb")


# ---------------------------------------------------------------------------
# estimand route


def ci(point, half=0.05):
    return (point, (point - half, point + half))


def test_estimand_route_trivial_patterns():
    assert classify_by_estimands({0.0: ci(0.02), 1.0: ci(0.02)}, ci(0.24)) == CRITICAL_2
    assert classify_by_estimands({0.0: ci(0.24), 1.0: ci(0.25)}, ci(0.02)) == CRITICAL_1
    assert classify_by_estimands({0.0: ci(0.3), 1.0: ci(0.31)}, ci(0.3)) == CUMULATIVE
    assert classify_by_estimands({0.0: ci(0.5), 1.0: ci(0.52)}, ci(0.2)) == SENSITIVE_1
    assert classify_by_estimands({0.0: ci(0.2), 1.0: ci(0.22)}, ci(0.52)) == SENSITIVE_2


def test_estimand_route_detects_variation_as_pathway():
    # disjoint intervals across second-period values
    assert classify_by_estimands({0.0: ci(0.1), 1.0: ci(0.5)}, ci(0.3)) == PATHWAY
    # point-only inputs fall back to the relative-spread rule
    assert classify_by_estimands({0.0: 0.1, 1.0: 0.5}, 0.3) == PATHWAY
    assert classify_by_estimands({0.0: 0.3, 1.0: 0.31}, 0.3) == CUMULATIVE


def test_estimand_route_scale_equivariant():
    for k in (0.1, 1.0, 40.0):
        assert classify_by_estimands({0.0: 0.02 * k, 1.0: 0.02 * k}, 0.24 * k) == CRITICAL_2
        assert classify_by_estimands({0.0: 0.3 * k, 1.0: 0.3 * k}, 0.3 * k) == CUMULATIVE


def test_estimand_route_all_zero_is_null():
    assert classify_by_estimands({0.0: 0.0, 1.0: 0.0}, 0.0) == NULL
    assert classify_by_estimands({0.0: ci(0.0, 0.02), 1.0: ci(0.0, 0.02)}, ci(0.0, 0.02)) == NULL


def test_estimand_route_validation():
    with pytest.raises(ConfigError):
        classify_by_estimands({0.0: 0.1}, 0.3)
    with pytest.raises(ConfigError):
        classify_by_estimands({0.0: 0.1, 1.0: 0.2}, 0.3, epsilon=1.5)
    with pytest.raises(ConfigError):
        classify_by_estimands({0.0: (0.1, (0.2, 0.0)), 1.0: 0.2}, 0.3)


def test_attach_estimand_evidence():
    fr = two_period_frame(0.3, 0.3, 0.0, seed=6)
    verdict = compare_nested(fr, "a1", "a2", "y")
    augmented = attach_estimand_evidence(verdict, {0.0: ci(0.3), 1.0: ci(0.3)}, ci(0.3))
    assert verdict.estimand_evidence is None
    assert augmented.estimand_evidence["classification"] == CUMULATIVE
    assert augmented.classification == verdict.classification
    assert augmented.as_dict()["estimand_evidence"]["epsilon"] == 0.25
