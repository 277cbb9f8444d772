"""Estimator-object facade over the functional core.

Each analysis entry point is wrapped in a small class with scikit-learn
conventions: constructor parameters mirror attribute names (so
``get_params`` / ``set_params`` and ``clone`` work), ``fit`` takes a
Frame (or TwinFrame / MrSummary where noted), returns ``self``, and
stores results in trailing-underscore attributes. The inputs are
column-addressed frames rather than feature matrices, so these
estimators compose with each other and with the transformers here, not
with generic sklearn pipelines over numpy arrays.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator, TransformerMixin

from . import effects, iv, lifecourse, twin
from .bootstrap import BootstrapPlan
from .errors import ConfigError, DataError
from .frame import Frame, StandardizationReport, standardize
from .measurement import extract_growth
from .regression import GAUSSIAN, ModelSpec


class ColumnStandardizer(BaseEstimator, TransformerMixin):
    """Center and scale continuous columns; invertible.

    columns=None standardizes every continuous column of the fit frame.
    """

    def __init__(self, columns=None):
        self.columns = columns

    def fit(self, frame: Frame, y=None):
        if self.columns is None:
            cols = [c for c in frame.names if frame.kind(c) == "continuous"]
        else:
            cols = list(self.columns)
        _, report = standardize(frame, cols)
        self.report_ = report
        return self

    def transform(self, frame: Frame) -> Frame:
        report: StandardizationReport = self.report_
        new = {}
        for c, mean, sd in zip(report.columns, report.means, report.sds):
            new[c] = (frame.column(c) - mean) / sd
        return frame.with_columns(new, kinds={c: frame.kind(c) for c in new})

    def inverse_transform(self, frame: Frame) -> Frame:
        report: StandardizationReport = self.report_
        new = {}
        for c, mean, sd in zip(report.columns, report.means, report.sds):
            new[c] = frame.column(c) * sd + mean
        return frame.with_columns(new, kinds={c: frame.kind(c) for c in new})


class GrowthFeatureExtractor(BaseEstimator, TransformerMixin):
    """Append per-subject size and velocity columns from repeated measures."""

    def __init__(self, measure_cols=(), ages=(), centering_age=0.0,
                 size_col="size", velocity_col="velocity"):
        self.measure_cols = measure_cols
        self.ages = ages
        self.centering_age = centering_age
        self.size_col = size_col
        self.velocity_col = velocity_col

    def fit(self, frame: Frame, y=None):
        _, features = self._run(frame)
        self.features_ = features
        return self

    def transform(self, frame: Frame) -> Frame:
        out, features = self._run(frame)
        self.features_ = features
        return out

    def _run(self, frame: Frame):
        return extract_growth(
            frame,
            measure_cols=tuple(self.measure_cols),
            ages=tuple(self.ages),
            centering_age=self.centering_age,
            size_col=self.size_col,
            velocity_col=self.velocity_col,
        )


class _RequestEstimator(BaseEstimator):
    """Shared fit machinery: build a request, estimate, optionally bootstrap."""

    _kind = ""

    def _request(self) -> effects.EstimandRequest:
        raise NotImplementedError

    def fit(self, frame: Frame, y=None):
        req = self._request()
        plan = getattr(self, "bootstrap", None)
        if plan is not None:
            if not isinstance(plan, BootstrapPlan):
                raise ConfigError("bootstrap must be a BootstrapPlan or None")
            self.estimate_ = effects.bootstrap_estimate(req, frame, plan)
        else:
            self.estimate_ = effects.estimate(req, frame, seed=getattr(self, "seed", 0))
        self.components_ = dict(self.estimate_.components)
        return self

    @staticmethod
    def _spec(formula: str, family: str) -> ModelSpec:
        return ModelSpec.from_formula(formula, family=family)


class TotalEffect(_RequestEstimator):
    """Exposure contrast standardized over observed covariates."""

    _kind = effects.TCE

    def __init__(self, exposure="", outcome_formula="", family=GAUSSIAN,
                 exposed=1.0, reference=0.0, confounders=(), seed=0, bootstrap=None):
        self.exposure = exposure
        self.outcome_formula = outcome_formula
        self.family = family
        self.exposed = exposed
        self.reference = reference
        self.confounders = confounders
        self.seed = seed
        self.bootstrap = bootstrap

    def _request(self):
        return effects.EstimandRequest(
            kind=self._kind,
            exposure=self.exposure,
            outcome_model=self._spec(self.outcome_formula, self.family),
            exposed=self.exposed,
            reference=self.reference,
            confounders=tuple(self.confounders),
        )


class ControlledDirectEffect(_RequestEstimator):
    """Exposure contrast with the mediator held at fixed values."""

    _kind = effects.CDE

    def __init__(self, exposure="", mediator="", fixed_values=(), outcome_formula="",
                 family=GAUSSIAN, exposed=1.0, reference=0.0, confounders=(),
                 intermediate_confounders=(), intermediate_formulas=(),
                 draws=200, seed=0, bootstrap=None):
        self.exposure = exposure
        self.mediator = mediator
        self.fixed_values = fixed_values
        self.outcome_formula = outcome_formula
        self.family = family
        self.exposed = exposed
        self.reference = reference
        self.confounders = confounders
        self.intermediate_confounders = intermediate_confounders
        self.intermediate_formulas = intermediate_formulas
        self.draws = draws
        self.seed = seed
        self.bootstrap = bootstrap

    def _request(self):
        return effects.EstimandRequest(
            kind=self._kind,
            exposure=self.exposure,
            outcome_model=self._spec(self.outcome_formula, self.family),
            exposed=self.exposed,
            reference=self.reference,
            confounders=tuple(self.confounders),
            mediator_blocks=((self.mediator,),),
            fixed_mediator_values=tuple(self.fixed_values),
            intermediate_confounders=tuple(self.intermediate_confounders),
            intermediate_models=tuple(
                self._spec(f, GAUSSIAN) for f in self.intermediate_formulas
            ),
            draws=self.draws,
        )


class InterventionalEffect(_RequestEstimator):
    """Direct/indirect decomposition for one mediator block."""

    _kind = effects.INTERVENTIONAL

    def __init__(self, exposure="", mediators=(), mediator_formulas=(),
                 outcome_formula="", family=GAUSSIAN, exposed=1.0, reference=0.0,
                 confounders=(), intermediate_confounders=(), intermediate_formulas=(),
                 draws=200, seed=0, bootstrap=None):
        self.exposure = exposure
        self.mediators = mediators
        self.mediator_formulas = mediator_formulas
        self.outcome_formula = outcome_formula
        self.family = family
        self.exposed = exposed
        self.reference = reference
        self.confounders = confounders
        self.intermediate_confounders = intermediate_confounders
        self.intermediate_formulas = intermediate_formulas
        self.draws = draws
        self.seed = seed
        self.bootstrap = bootstrap

    def _request(self):
        return effects.EstimandRequest(
            kind=self._kind,
            exposure=self.exposure,
            outcome_model=self._spec(self.outcome_formula, self.family),
            exposed=self.exposed,
            reference=self.reference,
            confounders=tuple(self.confounders),
            mediator_blocks=(tuple(self.mediators),),
            mediator_models=tuple(self._spec(f, GAUSSIAN) for f in self.mediator_formulas),
            intermediate_confounders=tuple(self.intermediate_confounders),
            intermediate_models=tuple(
                self._spec(f, GAUSSIAN) for f in self.intermediate_formulas
            ),
            draws=self.draws,
        )


class MultiMediatorEffect(_RequestEstimator):
    """Block-wise interventional decomposition with remainder."""

    _kind = effects.INTERVENTIONAL_MULTI

    def __init__(self, exposure="", mediator_blocks=(), mediator_formulas=(),
                 outcome_formula="", family=GAUSSIAN, exposed=1.0, reference=0.0,
                 confounders=(), draws=200, seed=0, bootstrap=None):
        self.exposure = exposure
        self.mediator_blocks = mediator_blocks
        self.mediator_formulas = mediator_formulas
        self.outcome_formula = outcome_formula
        self.family = family
        self.exposed = exposed
        self.reference = reference
        self.confounders = confounders
        self.draws = draws
        self.seed = seed
        self.bootstrap = bootstrap

    def _request(self):
        return effects.EstimandRequest(
            kind=self._kind,
            exposure=self.exposure,
            outcome_model=self._spec(self.outcome_formula, self.family),
            exposed=self.exposed,
            reference=self.reference,
            confounders=tuple(self.confounders),
            mediator_blocks=tuple(tuple(b) for b in self.mediator_blocks),
            mediator_models=tuple(self._spec(f, GAUSSIAN) for f in self.mediator_formulas),
            draws=self.draws,
        )


class DisparityMeasure(_RequestEstimator):
    """Exposure-group disparity with the mediator fixed."""

    _kind = effects.CDM

    def __init__(self, exposure="", mediator="", fixed_values=(), outcome_formula="",
                 family=GAUSSIAN, confounders=(), intermediate_confounders=(),
                 seed=0, bootstrap=None):
        self.exposure = exposure
        self.mediator = mediator
        self.fixed_values = fixed_values
        self.outcome_formula = outcome_formula
        self.family = family
        self.confounders = confounders
        self.intermediate_confounders = intermediate_confounders
        self.seed = seed
        self.bootstrap = bootstrap

    def _request(self):
        return effects.EstimandRequest(
            kind=self._kind,
            exposure=self.exposure,
            outcome_model=self._spec(self.outcome_formula, self.family),
            exposed=1.0,
            reference=0.0,
            confounders=tuple(self.confounders),
            mediator_blocks=((self.mediator,),),
            fixed_mediator_values=tuple(self.fixed_values),
            intermediate_confounders=tuple(self.intermediate_confounders),
        )


class LifecourseClassifier(BaseEstimator):
    """Nested-model comparison of two exposure periods."""

    def __init__(self, a1="", a2="", outcome="", confounders=(), alpha=0.05):
        self.a1 = a1
        self.a2 = a2
        self.outcome = outcome
        self.confounders = confounders
        self.alpha = alpha

    def fit(self, frame: Frame, y=None):
        self.verdict_ = lifecourse.compare_nested(
            frame, self.a1, self.a2, self.outcome,
            confounders=tuple(self.confounders), alpha=self.alpha,
        )
        self.classification_ = self.verdict_.classification
        return self


class NaiveTwinEffect(BaseEstimator):
    """Pooled twin regression with pair-clustered errors."""

    def __init__(self, covariates=()):
        self.covariates = covariates

    def fit(self, twin_frame: twin.TwinFrame, y=None):
        self.estimate_ = twin.naive_clustered(twin_frame, tuple(self.covariates))
        self.components_ = dict(self.estimate_.components)
        return self


class BetweenWithinEffect(BaseEstimator):
    """Between-within twin decomposition."""

    def __init__(self, covariate_mode=twin.MODE_NONE):
        self.covariate_mode = covariate_mode

    def fit(self, twin_frame: twin.TwinFrame, y=None):
        self.estimate_ = twin.between_within(twin_frame, self.covariate_mode)
        self.components_ = dict(self.estimate_.components)
        return self


class WaldRatioIV(BaseEstimator):
    """Single binary-instrument ratio estimator."""

    def __init__(self, instrument="", exposure="", outcome=""):
        self.instrument = instrument
        self.exposure = exposure
        self.outcome = outcome

    def fit(self, frame: Frame, y=None):
        self.estimate_ = iv.wald_ratio(frame, self.instrument, self.exposure, self.outcome)
        self.components_ = dict(self.estimate_.components)
        return self


class TwoStageIV(BaseEstimator):
    """Two-stage least squares."""

    def __init__(self, instruments=(), exposure="", outcome="", covariates=()):
        self.instruments = instruments
        self.exposure = exposure
        self.outcome = outcome
        self.covariates = covariates

    def fit(self, frame: Frame, y=None):
        self.estimate_ = iv.tsls(
            frame, tuple(self.instruments), self.exposure, self.outcome,
            tuple(self.covariates),
        )
        self.components_ = dict(self.estimate_.components)
        return self


class EggerRegression(BaseEstimator):
    """Summary-data slope/pleiotropy regression."""

    def fit(self, summary: iv.MrSummary, y=None):
        if isinstance(summary, Frame):
            summary = iv.MrSummary.from_frame(summary)
        if not isinstance(summary, iv.MrSummary):
            raise DataError("EggerRegression fits an MrSummary or a frame with its columns")
        self.estimate_ = iv.mr_egger(summary)
        self.components_ = dict(self.estimate_.components)
        return self
