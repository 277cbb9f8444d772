"""Estimators for paired data: one row per twin, two rows per pair.

Shared confounders (genes, family environment) bias the pooled
regression even with cluster-robust errors. The between-within model
regresses the outcome on the member's exposure and the pair mean; the
within coefficient is free of shared confounding. Non-shared covariates
need care: adjusting for the target twin's value alone conditions on a
collider (the pair mean ties the members together) and reintroduces
bias, while adjusting for both members' values removes it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.stats

from .effects import EffectEstimate
from .errors import ConfigError, DataError
from .frame import BINARY, CONTINUOUS, Frame
from .regression import (
    CLUSTER,
    GAUSSIAN,
    ModelSpec,
    fit_model,
    intercept,
    main,
)

MODE_NONE = "none"
MODE_TARGET_ONLY = "target_only"
MODE_BOTH_TWINS = "both_twins"
MODES = (MODE_NONE, MODE_TARGET_ONLY, MODE_BOTH_TWINS)

_Z = scipy.stats.norm.ppf(0.975)


@dataclass(frozen=True)
class TwinFrame:
    """Long-format twin data: the wrapped frame's cluster labels are pair ids."""

    frame: Frame
    exposure: str
    outcome: str
    nonshared: str | None = None
    zygosity: str | None = None

    def __post_init__(self):
        if self.frame.cluster_id is None:
            raise DataError("twin data need pair labels; load with a pair id column")
        used = [self.exposure, self.outcome]
        if self.nonshared is not None:
            used.append(self.nonshared)
        if self.zygosity is not None:
            used.append(self.zygosity)
        if len(set(used)) != len(used):
            raise ConfigError("twin column roles must be distinct")
        self.frame.require(used)
        _, counts = np.unique(self.frame.cluster_id, return_counts=True)
        if not np.all(counts == 2):
            bad = int(np.sum(counts != 2))
            raise DataError(f"every pair needs exactly 2 members; {bad} pair(s) violate this")

    @property
    def n_pairs(self) -> int:
        return self.frame.n_rows // 2

    def member_rows(self) -> tuple[np.ndarray, np.ndarray]:
        """Row indices of the two members of each pair, in pair order."""
        order = np.argsort(self.frame.cluster_id, kind="stable")
        return order[0::2], order[1::2]

    def pair_mean(self, column: str) -> np.ndarray:
        """Per-row pair mean of a column."""
        values = self.frame.column(column)
        left, right = self.member_rows()
        mean = 0.5 * (values[left] + values[right])
        out = np.empty(self.frame.n_rows)
        out[left] = mean
        out[right] = mean
        return out

    def cotwin(self, column: str) -> np.ndarray:
        """Per-row value of the same column for the other pair member."""
        values = self.frame.column(column)
        left, right = self.member_rows()
        out = np.empty(self.frame.n_rows)
        out[left] = values[right]
        out[right] = values[left]
        return out


def _temp_name(frame: Frame, base: str) -> str:
    name = base
    while name in frame.names:
        name += "_"
    return name


def _fill_normal_ci(est: EffectEstimate) -> EffectEstimate:
    for name, point in est.components.items():
        if name in est.se:
            half = _Z * est.se[name]
            est.ci95[name] = (point - half, point + half)
    return est


def _discordance_note(t: TwinFrame, diagnostics: dict) -> None:
    x = t.frame.column(t.exposure)
    if t.frame.kind(t.exposure) == BINARY:
        left, right = t.member_rows()
        discordant = int(np.sum(x[left] != x[right]))
        diagnostics["discordant_pairs"] = discordant
        diagnostics["note"] = (
            "binary exposure: the within-pair estimate applies to the "
            "discordant sub-population"
        )


def naive_clustered(t: TwinFrame, covariates: tuple[str, ...] = ()) -> EffectEstimate:
    """Pooled regression with pair-clustered standard errors.

    Clustering fixes the dependence, not the confounding: shared
    unmeasured causes of exposure and outcome still bias this estimate.
    """
    covariates = tuple(covariates)
    t.frame.require(covariates)
    if t.n_pairs < 2:
        raise DataError("need at least 2 pairs")
    spec = ModelSpec(
        response=t.outcome,
        family=GAUSSIAN,
        terms=(intercept(), main(t.exposure), *(main(c) for c in covariates)),
    )
    fm = fit_model(spec, t.frame, cov_kind=CLUSTER)
    est = EffectEstimate(
        components={"effect": fm.coefficient(t.exposure)},
        se={"effect": fm.coefficient_se(t.exposure)},
        diagnostics={"n_pairs": t.n_pairs, "cov": CLUSTER, "estimator": "naive_clustered"},
    )
    _discordance_note(t, est.diagnostics)
    return _fill_normal_ci(est)


def between_within(t: TwinFrame, covariate_mode: str = MODE_NONE) -> EffectEstimate:
    """Between-within decomposition of the exposure effect.

    Regresses the outcome on the member exposure and the pair-mean
    exposure; ``beta_within`` is the shared-confounder-adjusted effect,
    ``beta_between`` absorbs the between-pair confounding. Covariate
    modes for a non-shared covariate V: none, target_only (the member's
    own V; biased, kept for comparison), both_twins (own and co-twin V).
    Continuous outcomes only.
    """
    if covariate_mode not in MODES:
        raise ConfigError(f"covariate_mode must be one of {MODES}")
    if t.frame.kind(t.outcome) != CONTINUOUS:
        raise DataError(
            "between_within supports identity-link (continuous) outcomes only; "
            "on other scales the within-pair conditional effect and the "
            "marginal effect are not comparable"
        )
    if covariate_mode != MODE_NONE and t.nonshared is None:
        raise ConfigError(f"covariate_mode={covariate_mode!r} needs a nonshared covariate column")
    if t.n_pairs < 2:
        raise DataError("need at least 2 pairs")

    x = t.frame.column(t.exposure)
    xbar = t.pair_mean(t.exposure)
    if np.all(x == xbar):
        raise DataError(
            "all pairs are exposure-concordant; the within-pair effect is not identified"
        )

    new_cols = {}
    kinds = {}
    xbar_col = _temp_name(t.frame, f"{t.exposure}_pair_mean")
    new_cols[xbar_col] = xbar
    kinds[xbar_col] = CONTINUOUS
    terms = [intercept(), main(t.exposure), main(xbar_col)]
    diagnostics: dict = {
        "n_pairs": t.n_pairs,
        "cov": CLUSTER,
        "estimator": "between_within",
        "covariate_mode": covariate_mode,
    }
    if covariate_mode in (MODE_TARGET_ONLY, MODE_BOTH_TWINS):
        terms.append(main(t.nonshared))
    if covariate_mode == MODE_BOTH_TWINS:
        cotwin = t.cotwin(t.nonshared)
        if np.array_equal(cotwin, t.frame.column(t.nonshared)):
            # V identical within pairs: the co-twin copy is the same column
            # and would make the design singular; drop it.
            diagnostics["cotwin_covariate_dropped"] = True
        else:
            cot_col = _temp_name(t.frame, f"{t.nonshared}_cotwin")
            new_cols[cot_col] = cotwin
            kinds[cot_col] = t.frame.kinds[t.nonshared]
            terms.append(main(cot_col))

    augmented = t.frame.with_columns(new_cols, kinds=kinds)
    spec = ModelSpec(response=t.outcome, family=GAUSSIAN, terms=tuple(terms))
    fm = fit_model(spec, augmented, cov_kind=CLUSTER)
    est = EffectEstimate(
        components={
            "beta_within": fm.coefficient(t.exposure),
            "beta_between": fm.coefficient(xbar_col),
        },
        se={
            "beta_within": fm.coefficient_se(t.exposure),
            "beta_between": fm.coefficient_se(xbar_col),
        },
        diagnostics=diagnostics,
    )
    _discordance_note(t, est.diagnostics)
    return _fill_normal_ci(est)
