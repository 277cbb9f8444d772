"""Classification of two-period exposure effects.

Fits the saturated two-period regression

    y = b0 + b1*a1 + b2*a2 + b3*a1*a2 (+ confounders)

and compares constrained submodels to decide which longitudinal pattern
the data support: both periods mattering equally (cumulative), one
period only (critical), both but unequally (sensitive), or an
interaction between periods (pathway). A second entry point applies the
same decision table to estimated effects (controlled direct effect of
the first exposure at several second-period values, total effect of the
second) instead of regression coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping, NamedTuple, Sequence

import numpy as np
import scipy.stats

from .errors import ConfigError, DataError
from .frame import CONTINUOUS, Frame
from .regression import (
    GAUSSIAN,
    FittedModel,
    ModelSpec,
    f_test_nested,
    fit_model,
    intercept,
    interaction,
    main,
)

PATHWAY = "pathway"
CUMULATIVE = "cumulative"
SENSITIVE_1 = "sensitive_1"
SENSITIVE_2 = "sensitive_2"
CRITICAL_1 = "critical_1"
CRITICAL_2 = "critical_2"
NULL = "null"
LABELS = (PATHWAY, CUMULATIVE, SENSITIVE_1, SENSITIVE_2, CRITICAL_1, CRITICAL_2, NULL)


class SubmodelTest(NamedTuple):
    statistic: float
    df_num: int
    df_den: int
    p_value: float


@dataclass(frozen=True)
class LifecourseVerdict:
    classification: str
    fitted_full: FittedModel
    submodel_tests: dict[str, SubmodelTest]
    decision: dict[str, float]
    estimand_evidence: dict | None = None

    def as_dict(self) -> dict:
        out = {
            "classification": self.classification,
            "submodel_tests": {
                name: {
                    "statistic": t.statistic,
                    "df_num": t.df_num,
                    "df_den": t.df_den,
                    "p_value": t.p_value,
                }
                for name, t in self.submodel_tests.items()
            },
            "decision": dict(self.decision),
            "coefficients": {
                label: self.fitted_full.coefficient(label)
                for label in self.fitted_full.labels
            },
        }
        if self.estimand_evidence is not None:
            out["estimand_evidence"] = self.estimand_evidence
        return out


def derive_label(decision: Mapping[str, float], alpha: float) -> str:
    """Decision table over the stored test summaries.

    Tests apply in a fixed order: interaction first, then equality and
    nullity of the period coefficients from the additive refit. Kept
    separate from compare_nested so a verdict can be re-derived from its
    stored statistics.
    """
    if decision["p_synergy"] < alpha:
        return PATHWAY
    nonzero_1 = decision["p1"] < alpha
    nonzero_2 = decision["p2"] < alpha
    if nonzero_1 and nonzero_2:
        if decision["p_equal"] >= alpha:
            return CUMULATIVE
        return SENSITIVE_1 if abs(decision["b1"]) > abs(decision["b2"]) else SENSITIVE_2
    if nonzero_1:
        return CRITICAL_1
    if nonzero_2:
        return CRITICAL_2
    return NULL


def _coef_test(fm: FittedModel, label: str) -> tuple[float, float]:
    b = fm.coefficient(label)
    se = fm.coefficient_se(label)
    df = fm.n_obs - len(fm.labels)
    t = b / se
    return b, 2.0 * float(scipy.stats.t.sf(abs(t), df))


def _equality_test(fm: FittedModel, label1: str, label2: str) -> float:
    i = fm.labels.index(label1)
    j = fm.labels.index(label2)
    diff = fm.coef[i] - fm.coef[j]
    var = fm.cov[i, i] + fm.cov[j, j] - 2.0 * fm.cov[i, j]
    if var <= 0.0:
        return 1.0
    df = fm.n_obs - len(fm.labels)
    t = diff / np.sqrt(var)
    return 2.0 * float(scipy.stats.t.sf(abs(t), df))


def _sum_column_name(frame: Frame, a1: str, a2: str) -> str:
    name = f"{a1}_plus_{a2}"
    while name in frame.names:
        name += "_"
    return name


def compare_nested(
    frame: Frame,
    a1: str,
    a2: str,
    outcome: str,
    confounders: Sequence[str] = (),
    alpha: float = 0.05,
) -> LifecourseVerdict:
    """Fit the two-period model and classify via nested comparisons.

    Reports F tests of four constrained submodels against the full
    interaction model (no_synergy: b3=0; cumulative: b1=b2 and b3=0;
    critical_1: b2=b3=0; critical_2: b1=b3=0) and the label from the
    fixed-order decision table at level alpha.
    """
    if not 0.0 < alpha < 1.0:
        raise ConfigError("alpha must be in (0, 1)")
    confounders = tuple(confounders)
    cols = (a1, a2, outcome, *confounders)
    if len(set(cols)) != len(cols):
        raise ConfigError("a1, a2, outcome, and confounders must be distinct columns")
    frame.require(cols)
    if frame.kind(outcome) != CONTINUOUS:
        raise DataError(f"outcome {outcome!r} must be continuous for the two-period model")

    conf_terms = tuple(main(c) for c in confounders)
    full_spec = ModelSpec(
        response=outcome,
        family=GAUSSIAN,
        terms=(intercept(), main(a1), main(a2), interaction(a1, a2), *conf_terms),
    )
    full = fit_model(full_spec, frame)

    additive = fit_model(
        ModelSpec(outcome, GAUSSIAN, (intercept(), main(a1), main(a2), *conf_terms)),
        frame,
    )
    crit1 = fit_model(
        ModelSpec(outcome, GAUSSIAN, (intercept(), main(a1), *conf_terms)), frame
    )
    crit2 = fit_model(
        ModelSpec(outcome, GAUSSIAN, (intercept(), main(a2), *conf_terms)), frame
    )
    cum_col = _sum_column_name(frame, a1, a2)
    cum_frame = frame.with_columns(
        {cum_col: frame.column(a1) + frame.column(a2)}, kinds={cum_col: CONTINUOUS}
    )
    cumulative = fit_model(
        ModelSpec(outcome, GAUSSIAN, (intercept(), main(cum_col), *conf_terms)),
        cum_frame,
    )

    tests = {
        "no_synergy": SubmodelTest(*f_test_nested(full, additive)),
        "cumulative": SubmodelTest(*f_test_nested(full, cumulative)),
        "critical_1": SubmodelTest(*f_test_nested(full, crit1)),
        "critical_2": SubmodelTest(*f_test_nested(full, crit2)),
    }

    b1, p1 = _coef_test(additive, a1)
    b2, p2 = _coef_test(additive, a2)
    decision = {
        "alpha": alpha,
        "p_synergy": tests["no_synergy"].p_value,
        "b1": b1,
        "b2": b2,
        "p1": p1,
        "p2": p2,
        "p_equal": _equality_test(additive, a1, a2),
    }
    label = derive_label(decision, alpha)
    return LifecourseVerdict(
        classification=label, fitted_full=full, submodel_tests=tests, decision=decision
    )


PointCI = tuple[float, tuple[float, float] | None]


def _normalize(entry) -> PointCI:
    if isinstance(entry, (int, float)):
        return float(entry), None
    point, ci = entry
    if ci is None:
        return float(point), None
    lo, hi = float(ci[0]), float(ci[1])
    if lo > hi:
        raise ConfigError("interval endpoints out of order")
    return float(point), (lo, hi)


def _disjoint(a: tuple[float, float], b: tuple[float, float]) -> bool:
    return a[1] < b[0] or b[1] < a[0]


def _covers_zero(ci: tuple[float, float] | None) -> bool:
    return ci is not None and ci[0] <= 0.0 <= ci[1]


def classify_by_estimands(
    cde1: Mapping[float, object],
    tce2: object,
    epsilon: float = 0.25,
) -> str:
    """Label the exposure pattern from estimated effects.

    ``cde1`` maps second-period values to the first-period controlled
    direct effect there, each a point or (point, (lo, hi)); ``tce2`` is
    the second period's total effect in the same format. Variation of
    CDE1 across the second-period values indicates pathway; otherwise
    CDE1 is compared with TCE2. "Close to zero" means the interval
    covers zero and the point is below epsilon times the other effect;
    without intervals the epsilon rule alone applies. The decision is
    unchanged when all inputs are scaled by a positive constant.
    """
    if not 0.0 < epsilon < 1.0:
        raise ConfigError("epsilon must be in (0, 1)")
    if len(cde1) < 2:
        raise ConfigError("cde1 must be evaluated at >= 2 second-period values")
    entries = [_normalize(v) for _, v in sorted(cde1.items())]
    tce_point, tce_ci = _normalize(tce2)
    points = [p for p, _ in entries]
    cis = [ci for _, ci in entries]

    scale = max(max(abs(p) for p in points), abs(tce_point))
    if all(ci is not None for ci in cis):
        for i in range(len(cis)):
            for j in range(i + 1, len(cis)):
                if _disjoint(cis[i], cis[j]):
                    return PATHWAY
    elif scale > 0.0 and (max(points) - min(points)) > epsilon * scale:
        return PATHWAY

    if scale == 0.0:
        return NULL
    cde_point = float(np.mean(points))
    cde_ci: tuple[float, float] | None = None
    if all(ci is not None for ci in cis):
        # Conservative summary interval: the hull of the per-value intervals.
        cde_ci = (min(ci[0] for ci in cis), max(ci[1] for ci in cis))
    with_cis = cde_ci is not None and tce_ci is not None

    def near_zero(point: float, ci, other: float) -> bool:
        small = abs(point) < epsilon * abs(other)
        if with_cis:
            return _covers_zero(ci) and small
        return small

    cde_zero = near_zero(cde_point, cde_ci, tce_point)
    tce_zero = near_zero(tce_point, tce_ci, cde_point)
    if cde_zero and tce_zero:
        return NULL
    if cde_zero:
        return CRITICAL_2
    if tce_zero:
        return CRITICAL_1

    close = abs(cde_point - tce_point) <= epsilon * max(abs(cde_point), abs(tce_point))
    if with_cis and cde_ci is not None and tce_ci is not None:
        close = close and not _disjoint(cde_ci, tce_ci)
    if close:
        return CUMULATIVE
    return SENSITIVE_1 if abs(cde_point) > abs(tce_point) else SENSITIVE_2


def attach_estimand_evidence(
    verdict: LifecourseVerdict,
    cde1: Mapping[float, object],
    tce2: object,
    epsilon: float = 0.25,
) -> LifecourseVerdict:
    """Return a copy of the verdict carrying effect-based evidence."""
    label = classify_by_estimands(cde1, tce2, epsilon=epsilon)
    evidence = {
        "cde1": {float(k): _normalize(v) for k, v in cde1.items()},
        "tce2": _normalize(tce2),
        "epsilon": epsilon,
        "classification": label,
    }
    return replace(verdict, estimand_evidence=evidence)
