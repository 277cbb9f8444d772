"""Instrumental-variable estimators.

When exposure and outcome share unmeasured causes, a variable that
affects the outcome only through the exposure (an instrument) still
identifies the effect: the Wald ratio divides the instrument-outcome
contrast by the instrument-exposure contrast, and two-stage least
squares generalizes this to several instruments and covariates. For
genetic instruments summarized per variant, a regression of outcome
associations on exposure associations with an intercept separates the
causal slope from average directional pleiotropy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd
import scipy.stats

from .effects import EffectEstimate
from .errors import ConfigError, DataError, EstimationError
from .frame import Frame
from .regression import (
    GAUSSIAN,
    ModelSpec,
    build_design,
    f_test_nested,
    fit_model,
    intercept,
    main,
    _qr_solve,
    _xtx_inverse,
)

_Z = scipy.stats.norm.ppf(0.975)
_WEAK_F = 10.0

_HOMOGENEITY_NOTE = (
    "point identification assumes a homogeneous exposure effect; under "
    "monotonicity instead, the ratio estimates the average effect among "
    "those whose exposure the instrument moves"
)


@dataclass(frozen=True)
class MrSummary:
    """Per-variant summary associations for summary-data analyses."""

    beta_exposure: np.ndarray
    se_exposure: np.ndarray
    beta_outcome: np.ndarray
    se_outcome: np.ndarray

    def __post_init__(self):
        arrays = {}
        for name in ("beta_exposure", "se_exposure", "beta_outcome", "se_outcome"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if arr.ndim != 1:
                raise DataError(f"{name} must be one-dimensional")
            if not np.all(np.isfinite(arr)):
                raise DataError(f"{name} contains non-finite values")
            arrays[name] = arr
        lengths = {a.shape[0] for a in arrays.values()}
        if len(lengths) != 1:
            raise DataError("summary arrays must have equal length")
        if lengths.pop() < 3:
            raise DataError("need at least 3 variants")
        for name in ("se_exposure", "se_outcome"):
            if not np.all(arrays[name] > 0.0):
                raise DataError(f"{name} must be positive")
        for name, arr in arrays.items():
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_variants(self) -> int:
        return self.beta_exposure.shape[0]

    @classmethod
    def from_frame(cls, frame: Frame) -> "MrSummary":
        frame.require(("beta_exposure", "se_exposure", "beta_outcome", "se_outcome"))
        return cls(
            beta_exposure=frame.column("beta_exposure"),
            se_exposure=frame.column("se_exposure"),
            beta_outcome=frame.column("beta_outcome"),
            se_outcome=frame.column("se_outcome"),
        )

    @classmethod
    def from_csv(cls, path) -> "MrSummary":
        try:
            df = pd.read_csv(path)
        except (OSError, ValueError, pd.errors.ParserError) as exc:
            raise DataError(f"could not read summary file {path}: {exc}") from exc
        needed = ("beta_exposure", "se_exposure", "beta_outcome", "se_outcome")
        missing = [c for c in needed if c not in df.columns]
        if missing:
            raise DataError("summary file is missing columns: " + ", ".join(missing))
        try:
            cols = {c: df[c].to_numpy(dtype=np.float64) for c in needed}
        except (TypeError, ValueError) as exc:
            raise DataError(f"summary columns must be numeric: {exc}") from exc
        return cls(**cols)


def _normal_ci(est: EffectEstimate) -> EffectEstimate:
    for name, point in est.components.items():
        if name in est.se:
            half = _Z * est.se[name]
            est.ci95[name] = (point - half, point + half)
    return est


def wald_ratio(frame: Frame, z: str, a: str, y: str) -> EffectEstimate:
    """Ratio of instrument-outcome to instrument-exposure contrasts.

    SE by the delta method from the group-mean sampling covariances.
    Flags the instrument as weak when the denominator is within 10 of
    its own standard errors of zero.
    """
    if len({z, a, y}) != 3:
        raise ConfigError("instrument, exposure, and outcome must be distinct")
    frame.require((z, a, y))
    zv = frame.column(z)
    if not np.all((zv == 0.0) | (zv == 1.0)):
        raise DataError(f"instrument {z!r} must be binary 0/1")
    mask1 = zv == 1.0
    n1 = int(mask1.sum())
    n0 = frame.n_rows - n1
    if n1 < 2 or n0 < 2:
        raise DataError("need at least 2 rows at each instrument level")
    av, yv = frame.column(a), frame.column(y)

    def group_stats(mask, n):
        ya = yv[mask]
        aa = av[mask]
        dy = ya - ya.mean()
        da = aa - aa.mean()
        return (
            float(ya.mean()),
            float(aa.mean()),
            float(dy @ dy) / (n - 1),
            float(da @ da) / (n - 1),
            float(dy @ da) / (n - 1),
        )

    ybar1, abar1, vy1, va1, cov1 = group_stats(mask1, n1)
    ybar0, abar0, vy0, va0, cov0 = group_stats(~mask1, n0)
    num = ybar1 - ybar0
    den = abar1 - abar0
    if den == 0.0:
        raise EstimationError("instrument does not move the exposure (zero denominator)")
    est = num / den
    var_num = vy1 / n1 + vy0 / n0
    var_den = va1 / n1 + va0 / n0
    cov_nd = cov1 / n1 + cov0 / n0
    var_est = (var_num + est**2 * var_den - 2.0 * est * cov_nd) / den**2
    se = float(np.sqrt(max(var_est, 0.0)))
    diagnostics = {
        "estimator": "wald_ratio",
        "numerator": num,
        "denominator": den,
        "weak_instrument": bool(abs(den) < _WEAK_F * np.sqrt(var_den)),
        "n_obs": frame.n_rows,
        "assumptions": _HOMOGENEITY_NOTE,
    }
    out = EffectEstimate(
        components={"effect": est}, se={"effect": se}, diagnostics=diagnostics
    )
    return _normal_ci(out)


def _temp_name(frame: Frame, base: str) -> str:
    name = base
    while name in frame.names:
        name += "_"
    return name


def tsls(
    frame: Frame,
    instruments: tuple[str, ...] | list[str],
    a: str,
    y: str,
    covariates: tuple[str, ...] | list[str] = (),
) -> EffectEstimate:
    """Two-stage least squares.

    Stage 1 regresses the exposure on instruments and covariates; stage
    2 regresses the outcome on the fitted exposure and covariates. The
    coefficient covariance uses residuals recomputed with the observed
    exposure, the usual correction for the generated regressor.
    """
    instruments = tuple(instruments)
    covariates = tuple(covariates)
    if not instruments:
        raise ConfigError("need at least one instrument")
    roles = (*instruments, a, y, *covariates)
    if len(set(roles)) != len(roles):
        raise ConfigError("instruments, exposure, outcome, and covariates must be distinct")
    frame.require(roles)

    conf_terms = tuple(main(c) for c in covariates)
    stage1 = fit_model(
        ModelSpec(a, GAUSSIAN, (intercept(), *(main(i) for i in instruments), *conf_terms)),
        frame,
    )
    reduced = fit_model(ModelSpec(a, GAUSSIAN, (intercept(), *conf_terms)), frame)
    f_stat, f_df1, f_df2, f_p = f_test_nested(stage1, reduced)

    ahat_col = _temp_name(frame, f"{a}_fitted")
    context = dict(frame.data)
    context[ahat_col] = stage1.linear_predictor(frame)
    spec2 = ModelSpec(y, GAUSSIAN, (intercept(), main(ahat_col), *conf_terms))
    X2, labels2 = build_design(spec2, context)
    yv = frame.column(y)
    n, p = X2.shape
    if n <= p:
        raise DataError(f"need more rows ({n}) than parameters ({p})")
    coef, R, piv = _qr_solve(X2, yv, labels2)
    xtx_inv = _xtx_inverse(R, piv)
    context[ahat_col] = frame.column(a)
    X_obs, _ = build_design(spec2, context)
    resid = yv - X_obs @ coef
    sigma2 = float(resid @ resid) / (n - p)
    cov = sigma2 * xtx_inv

    i = labels2.index(ahat_col)
    diagnostics = {
        "estimator": "tsls",
        "first_stage_F": f_stat,
        "first_stage_df": (f_df1, f_df2),
        "first_stage_p": f_p,
        "weak_instrument": bool(f_stat < _WEAK_F),
        "n_obs": n,
        "coefficients": {lab: float(c) for lab, c in zip(labels2, coef)},
        "assumptions": _HOMOGENEITY_NOTE,
    }
    out = EffectEstimate(
        components={"effect": float(coef[i])},
        se={"effect": float(np.sqrt(cov[i, i]))},
        diagnostics=diagnostics,
    )
    return _normal_ci(out)


def mr_egger(s: MrSummary) -> EffectEstimate:
    """Summary-data regression separating causal slope from pleiotropy.

    Orients every variant so its exposure association is non-negative,
    then fits beta_outcome ~ intercept + beta_exposure by weighted least
    squares with weights 1/se_outcome^2. The slope estimates the causal
    effect; the intercept estimates average directional pleiotropy.
    Multiplicative over-dispersion is estimated and floored at 1, and
    intervals use the t distribution with n_variants - 2 df.
    """
    sign = np.where(s.beta_exposure < 0.0, -1.0, 1.0)
    bx = s.beta_exposure * sign
    by = s.beta_outcome * sign
    if np.any(bx == 0.0):
        raise DataError("zero exposure associations cannot be oriented")
    w = 1.0 / s.se_outcome**2
    sw = np.sqrt(w)
    X = np.column_stack([np.ones_like(bx), bx])
    labels = ("intercept", "slope")
    coef, R, piv = _qr_solve(X * sw[:, None], by * sw, labels)
    xtx_inv = _xtx_inverse(R, piv)
    df = s.n_variants - 2
    resid_w = (by - X @ coef) * sw
    dispersion = max(1.0, float(resid_w @ resid_w) / df)
    cov = dispersion * xtx_inv
    se = np.sqrt(np.diag(cov))
    tq = float(scipy.stats.t.ppf(0.975, df))
    intercept_t = coef[0] / se[0] if se[0] > 0 else np.inf
    out = EffectEstimate(
        components={"slope": float(coef[1]), "intercept": float(coef[0])},
        se={"slope": float(se[1]), "intercept": float(se[0])},
        ci95={
            "slope": (float(coef[1] - tq * se[1]), float(coef[1] + tq * se[1])),
            "intercept": (float(coef[0] - tq * se[0]), float(coef[0] + tq * se[0])),
        },
        diagnostics={
            "estimator": "mr_egger",
            "n_variants": s.n_variants,
            "dispersion": dispersion,
            "intercept_p": 2.0 * float(scipy.stats.t.sf(abs(intercept_t), df)),
            "flipped_variants": int(np.sum(sign < 0.0)),
        },
    )
    return out
