"""Corrections for classical measurement error and growth features.

Classical error in a continuous regressor shrinks its coefficient
toward zero by the reliability ratio r = var(true) / var(observed).
Dividing the naive coefficient by an externally supplied r undoes the
attenuation; the same division applies to a mediated (indirect) effect
estimated through a noisily measured mediator, with the direct effect
recovered as total minus corrected indirect.

Repeated measures of a trajectory (e.g. an anthropometric measure at
several ages) can be summarized per subject by a least-squares line:
the fitted level at a centering age (size) and the per-year slope
(velocity). These are error-prone proxies for the underlying latent
level and slope; the two-stage construction is deterministic and cheap,
at the price of ignoring shrinkage a joint latent-variable fit would
apply.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError
from .frame import CONTINUOUS, Frame

EXTERNAL = "external"
EMBEDDED = "embedded"


@dataclass(frozen=True)
class Reliability:
    """Intraclass correlation of an error-prone measure, in (0, 1]."""

    r: float
    se_r: float | None = None
    source: str = EXTERNAL

    def __post_init__(self):
        if not 0.0 < self.r <= 1.0:
            raise ConfigError("reliability must be in (0, 1]")
        if self.se_r is not None and self.se_r < 0.0:
            raise ConfigError("se_r must be non-negative")
        if self.source not in (EXTERNAL, EMBEDDED):
            raise ConfigError(f"unknown reliability source {self.source!r}")


@dataclass(frozen=True)
class CorrectedEstimate:
    point: float
    se: float | None = None


def disattenuate(beta_hat: float, rel: Reliability, se: float | None = None) -> CorrectedEstimate:
    """Undo attenuation of a coefficient: beta_hat / r.

    With uncertainty available, a first-order (delta method) SE combines
    the coefficient's sampling error and, when known, the reliability's:
    var = se^2 / r^2 + beta^2 * se_r^2 / r^4. The two sources are treated
    as independent, which holds when r comes from an external study.
    """
    point = beta_hat / rel.r
    var = 0.0
    have_any = False
    if se is not None:
        if se < 0.0:
            raise ConfigError("se must be non-negative")
        var += se**2 / rel.r**2
        have_any = True
    if rel.se_r is not None:
        var += beta_hat**2 * rel.se_r**2 / rel.r**4
        have_any = True
    return CorrectedEstimate(point=point, se=float(np.sqrt(var)) if have_any else None)


def _anchor_sum(total: float, part: float) -> tuple[float, float]:
    # Nudge the complement by the observed rounding error so the pair sums
    # back to the total, bitwise where a representable split exists. It may
    # not: part + rest moves in steps of ulp(part) as rest varies, and total
    # can fall between two steps. Scan the neighbors and keep the closest.
    rest = total - part
    for _ in range(2):
        err = (part + rest) - total
        if err == 0.0:
            return part, rest
        rest -= err
    best = rest
    best_err = abs((part + rest) - total)
    for direction in (np.inf, -np.inf):
        cand = rest
        for _ in range(3):
            cand = float(np.nextafter(cand, direction))
            err = abs((part + cand) - total)
            if err < best_err:
                best, best_err = cand, err
    return part, best


def correct_indirect(
    total_effect: float, iie_naive: float, rel: Reliability
) -> tuple[float, float]:
    """Correct an indirect effect through a noisily measured mediator.

    Returns (iie_corrected, direct_corrected) where
    iie_corrected = iie_naive / r and direct_corrected makes the pair
    sum to total_effect exactly whenever a representable split exists,
    and to within one unit in the last place otherwise (some float pairs
    admit no exact complement). Valid for linear outcome and mediator
    models and for decompositions in which direct + indirect equals the
    total; with a nonzero remainder term the caller must decide where
    the remainder belongs before applying this.
    """
    iie_corrected = iie_naive / rel.r
    iie_corrected, direct_corrected = _anchor_sum(total_effect, iie_corrected)
    return iie_corrected, direct_corrected


@dataclass(frozen=True)
class GrowthFeatures:
    """Provenance of per-subject growth summaries appended to a frame."""

    size_col: str
    velocity_col: str
    centering_age: float
    ages: tuple[float, ...]
    measure_cols: tuple[str, ...]

    @property
    def n_points(self) -> int:
        return len(self.ages)

    def as_dict(self) -> dict:
        return {
            "size_col": self.size_col,
            "velocity_col": self.velocity_col,
            "centering_age": self.centering_age,
            "ages": list(self.ages),
            "measure_cols": list(self.measure_cols),
            "n_points": self.n_points,
        }


def extract_growth(
    frame: Frame,
    measure_cols: tuple[str, ...] | list[str],
    ages: tuple[float, ...] | list[float],
    centering_age: float,
    size_col: str = "size",
    velocity_col: str = "velocity",
) -> tuple[Frame, GrowthFeatures]:
    """Per-subject least-squares line through the repeated measures.

    size = fitted value at centering_age, velocity = slope per year;
    both are appended as continuous columns. All subjects share the same
    measurement ages, so one two-column solve handles every row at once.
    """
    measure_cols = tuple(measure_cols)
    ages = tuple(float(a) for a in ages)
    if len(measure_cols) < 2:
        raise ConfigError("growth extraction needs at least 2 measure columns")
    if len(ages) != len(measure_cols):
        raise ConfigError("ages must match measure columns one-to-one")
    if any(b <= a for a, b in zip(ages, ages[1:])):
        raise ConfigError("ages must be strictly increasing")
    frame.require(measure_cols)
    for c in measure_cols:
        if frame.kind(c) != CONTINUOUS:
            raise DataError(f"measure column {c!r} must be continuous")
    for new in (size_col, velocity_col):
        if new in frame.names:
            raise ConfigError(f"column {new!r} already exists")
    if size_col == velocity_col:
        raise ConfigError("size and velocity columns must differ")

    centered = np.asarray(ages) - float(centering_age)
    design = np.column_stack([np.ones(len(ages)), centered])
    measures = np.stack([frame.column(c) for c in measure_cols])
    coef, _, _, _ = np.linalg.lstsq(design, measures, rcond=None)
    out = frame.with_columns(
        {size_col: coef[0], velocity_col: coef[1]},
        kinds={size_col: CONTINUOUS, velocity_col: CONTINUOUS},
    )
    features = GrowthFeatures(
        size_col=size_col,
        velocity_col=velocity_col,
        centering_age=float(centering_age),
        ages=ages,
        measure_cols=measure_cols,
    )
    return out, features
