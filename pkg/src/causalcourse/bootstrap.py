"""Nonparametric bootstrap for effect estimates.

Resamples rows (iid mode) or whole clusters (cluster mode, preserving the
number of clusters), re-evaluates a statistic on each replicate frame,
and summarizes each named component with a standard error and a 95%
interval. Replicates that raise are dropped; if more than 10% fail the
run aborts rather than reporting intervals built on a biased subset.

Determinism: replicate k resamples with a generator keyed by
(seed, 0, k) and hands the statistic its own derived seed, so results are
bitwise identical for a fixed plan regardless of evaluation order or
thread count.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np
import scipy.stats

from .errors import (
    BootstrapAbort,
    CausalCourseError,
    ConfigError,
    DataError,
)
from .frame import Frame

IID = "iid"
CLUSTER = "cluster"
PERCENTILE = "percentile"
NORMAL = "normal"

# statistic(frame, seed) -> {component name: value}
Statistic = Callable[[Frame, int], Mapping[str, float]]


@dataclass(frozen=True)
class BootstrapPlan:
    replicates: int = 1000
    mode: str = IID
    seed: int = 0
    ci: str = PERCENTILE

    def __post_init__(self):
        if self.mode not in (IID, CLUSTER):
            raise ConfigError(f"unknown bootstrap mode {self.mode!r}")
        if self.ci not in (PERCENTILE, NORMAL):
            raise ConfigError(f"unknown interval method {self.ci!r}")
        if self.replicates < 2:
            raise ConfigError("bootstrap needs at least 2 replicates")
        if self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")


@dataclass
class BootstrapResult:
    point: dict[str, float]
    se: dict[str, float]
    ci95: dict[str, tuple[float, float]]
    replicates: dict[str, np.ndarray]
    n_used: int
    n_failed: int


def derive_seed(seed: int, *path: int) -> int:
    """Deterministic child seed along an integer path."""
    return int(np.random.SeedSequence((seed, *path)).generate_state(1)[0])


def _resampler(plan: BootstrapPlan, frame: Frame):
    """Returns draw(rng) -> (row indices, replacement cluster labels or None)."""
    n = frame.n_rows
    if plan.mode == IID:
        def draw(rng: np.random.Generator):
            return rng.integers(0, n, n), None
        return draw
    if frame.cluster_id is None:
        raise DataError("cluster bootstrap requires frame cluster labels")
    labels = frame.cluster_id
    order = np.argsort(labels, kind="stable")
    boundaries = np.flatnonzero(np.diff(labels[order])) + 1
    groups = np.split(order, boundaries)
    sizes = np.asarray([g.shape[0] for g in groups])
    n_clusters = len(groups)

    def draw(rng: np.random.Generator):
        chosen = rng.integers(0, n_clusters, n_clusters)
        idx = np.concatenate([groups[i] for i in chosen])
        # Each drawn cluster is a fresh unit: relabel so a cluster picked
        # twice does not collapse into one oversized cluster downstream.
        new_labels = np.repeat(np.arange(n_clusters, dtype=np.int64), sizes[chosen])
        return idx, new_labels

    return draw


def bootstrap(plan: BootstrapPlan, frame: Frame, statistic: Statistic) -> BootstrapResult:
    """Bootstrap a component-map statistic over resampled frames."""
    point = dict(statistic(frame, derive_seed(plan.seed, 2)))
    if not point:
        raise ConfigError("statistic returned no components")
    names = list(point)
    draw = _resampler(plan, frame)

    budget = plan.replicates // 10
    values: dict[str, list[float]] = {k: [] for k in names}
    n_failed = 0
    for k in range(plan.replicates):
        rng = np.random.default_rng(np.random.SeedSequence((plan.seed, 0, k)))
        idx, new_labels = draw(rng)
        rep_frame = frame.take(idx, cluster_id=new_labels)
        try:
            rep = statistic(rep_frame, derive_seed(plan.seed, 1, k))
        except (CausalCourseError, np.linalg.LinAlgError):
            n_failed += 1
            if n_failed > budget:
                raise BootstrapAbort(n_failed, plan.replicates) from None
            continue
        for name in names:
            values[name].append(float(rep[name]))

    reps = {k: np.asarray(v) for k, v in values.items()}
    n_used = plan.replicates - n_failed
    se = {k: float(np.std(v, ddof=1)) for k, v in reps.items()}
    ci95 = {}
    if plan.ci == PERCENTILE:
        lo_idx = int(np.floor(0.025 * (n_used - 1)))
        hi_idx = int(np.ceil(0.975 * (n_used - 1)))
        for k, v in reps.items():
            s = np.sort(v)
            ci95[k] = (float(s[lo_idx]), float(s[hi_idx]))
    else:
        z = float(scipy.stats.norm.ppf(0.975))
        for k in names:
            ci95[k] = (point[k] - z * se[k], point[k] + z * se[k])
    return BootstrapResult(
        point=point,
        se=se,
        ci95=ci95,
        replicates=reps,
        n_used=n_used,
        n_failed=n_failed,
    )
