"""Linear and logistic regression on Frame columns.

Models are declared as term lists (intercept, main effects, powers,
two- and three-way products) either programmatically or through a small
formula syntax::

    y ~ 1 + a1 + a2 + a1:a2 + a2^2

Gaussian models use an identity link and are solved by orthogonal
decomposition of the design matrix; binomial models use a logit link and
iteratively reweighted least squares. Rank deficiency is a hard error
naming the dependent columns. Three covariance estimators are available:
model-based, heteroskedasticity-robust, and cluster-robust sandwiches
(no small-sample corrections, so the cluster form with singleton
clusters coincides with the robust form).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
import scipy.linalg
import scipy.stats
from scipy.special import expit

from .errors import (
    ConvergenceError,
    DataError,
    RankDeficiencyError,
    SeparationError,
    SpecificationError,
)
from .frame import Frame

GAUSSIAN = "gaussian"
BINOMIAL = "binomial"
_FAMILIES = (GAUSSIAN, BINOMIAL)

MODEL = "model"
ROBUST = "robust"
CLUSTER = "cluster"
_COV_KINDS = (MODEL, ROBUST, CLUSTER)

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_MAX_IRLS_ITERATIONS = 100
_SCORE_TOL = 1e-10
_SEPARATION_BOUND = 1e4


@dataclass(frozen=True)
class Term:
    """One design column: a product of named columns, optionally powered.

    ``cols=()`` is the intercept. A single column with ``exponent`` k >= 2
    is a polynomial term. Products of two or three distinct columns are
    interactions; their column order is canonicalized so ``a:b`` and
    ``b:a`` are the same term.
    """

    cols: tuple[str, ...] = ()
    exponent: int = 1

    def __post_init__(self):
        cols = tuple(self.cols)
        if len(cols) > 3:
            raise SpecificationError("terms support at most three-way products")
        if len(set(cols)) != len(cols):
            raise SpecificationError(f"repeated column in term: {cols}")
        if self.exponent < 1:
            raise SpecificationError("term exponent must be >= 1")
        if self.exponent > 1 and len(cols) != 1:
            raise SpecificationError("powers apply to single columns only")
        for c in cols:
            if not _NAME_RE.match(c):
                raise SpecificationError(f"invalid column name in term: {c!r}")
        object.__setattr__(self, "cols", tuple(sorted(cols)))

    @property
    def label(self) -> str:
        if not self.cols:
            return "1"
        if self.exponent > 1:
            return f"{self.cols[0]}^{self.exponent}"
        return ":".join(self.cols)

    def build(self, data: Mapping[str, np.ndarray]) -> np.ndarray:
        if not self.cols:
            n = next(iter(data.values())).size
            return np.ones(n)
        col = np.asarray(data[self.cols[0]], dtype=np.float64)
        if self.exponent > 1:
            return col**self.exponent
        out = col
        for c in self.cols[1:]:
            out = out * np.asarray(data[c], dtype=np.float64)
        return out


def intercept() -> Term:
    return Term(())


def main(col: str) -> Term:
    return Term((col,))


def power(col: str, k: int) -> Term:
    if k < 2:
        raise SpecificationError("power terms require exponent >= 2")
    return Term((col,), exponent=k)


def interaction(a: str, b: str) -> Term:
    return Term((a, b))


def triple(a: str, b: str, c: str) -> Term:
    return Term((a, b, c))


@dataclass(frozen=True)
class ModelSpec:
    """Declarative regression model: response, family, and term list."""

    response: str
    family: str
    terms: tuple[Term, ...]

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise SpecificationError(f"unknown family {self.family!r}")
        if not _NAME_RE.match(self.response):
            raise SpecificationError(f"invalid response name {self.response!r}")
        terms = tuple(self.terms)
        if not terms:
            raise SpecificationError("model needs at least one term")
        if len(set(terms)) != len(terms):
            raise SpecificationError("duplicate terms in model")
        if sum(1 for t in terms if not t.cols) > 1:
            raise SpecificationError("intercept may appear at most once")
        for t in terms:
            if self.response in t.cols:
                raise SpecificationError("response cannot appear on the right-hand side")
        object.__setattr__(self, "terms", terms)

    @property
    def columns_used(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for t in self.terms:
            for c in t.cols:
                seen.setdefault(c)
        return tuple(seen)

    @property
    def formula(self) -> str:
        return f"{self.response} ~ " + " + ".join(t.label for t in self.terms)

    @classmethod
    def from_formula(cls, text: str, family: str = GAUSSIAN) -> "ModelSpec":
        response, terms = parse_formula(text)
        return cls(response=response, family=family, terms=terms)


def parse_formula(text: str) -> tuple[str, tuple[Term, ...]]:
    """Parse ``response ~ term + term + ...`` into (response, terms).

    Recognized terms: ``1`` (intercept), names, ``name^k``, ``a:b``,
    ``a:b:c``. ``0`` or ``-1`` suppresses the otherwise implicit
    intercept.
    """
    parts = text.split("~")
    if len(parts) != 2:
        raise SpecificationError(f"formula needs exactly one '~': {text!r}")
    response = parts[0].strip()
    terms: list[Term] = []
    suppress = False
    explicit = False
    for token in (t.strip() for t in parts[1].split("+")):
        if not token:
            raise SpecificationError(f"empty term in formula {text!r}")
        if token in ("0", "-1"):
            suppress = True
        elif token == "1":
            explicit = True
        elif "^" in token:
            base, _, exp = token.partition("^")
            base, exp = base.strip(), exp.strip()
            if not exp.isdigit() or int(exp) < 2:
                raise SpecificationError(f"bad power term {token!r}")
            terms.append(power(base, int(exp)))
        elif ":" in token:
            cols = tuple(c.strip() for c in token.split(":"))
            terms.append(Term(cols))
        else:
            terms.append(main(token))
    if explicit and suppress:
        raise SpecificationError("formula both includes and suppresses the intercept")
    if not suppress:
        terms.insert(0, intercept())
    if not terms:
        raise SpecificationError("formula has no terms")
    return response, tuple(terms)


@dataclass(frozen=True)
class FittedModel:
    """Coefficients, covariance, and fit diagnostics for one model."""

    spec: ModelSpec
    labels: tuple[str, ...]
    coef: np.ndarray
    cov: np.ndarray
    cov_kind: str
    n_obs: int
    rss: float | None = None
    residual_sd: float | None = None
    iterations: int = 0
    score_norm: float = 0.0

    @property
    def se(self) -> np.ndarray:
        return np.sqrt(np.diag(self.cov))

    def coefficient(self, label: str) -> float:
        try:
            return float(self.coef[self.labels.index(label)])
        except ValueError:
            raise SpecificationError(f"model has no term {label!r}") from None

    def coefficient_se(self, label: str) -> float:
        try:
            i = self.labels.index(label)
        except ValueError:
            raise SpecificationError(f"model has no term {label!r}") from None
        return float(np.sqrt(self.cov[i, i]))

    def design(self, data: Mapping[str, np.ndarray] | Frame) -> np.ndarray:
        if isinstance(data, Frame):
            data = data.data
        return np.column_stack([t.build(data) for t in self.spec.terms])

    def linear_predictor(self, data: Mapping[str, np.ndarray] | Frame) -> np.ndarray:
        return self.design(data) @ self.coef


def build_design(spec: ModelSpec, data: Mapping[str, np.ndarray]) -> tuple[np.ndarray, tuple[str, ...]]:
    missing = [c for c in spec.columns_used if c not in data]
    if missing:
        raise DataError("model uses columns absent from data: " + ", ".join(missing))
    X = np.column_stack([t.build(data) for t in spec.terms])
    return X, tuple(t.label for t in spec.terms)


def _qr_solve(
    X: np.ndarray, y: np.ndarray, labels: Sequence[str]
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Least squares via pivoted QR; returns (coef, R, pivot).

    Raises RankDeficiencyError naming the columns that pivoting pushed
    past the numerical rank.
    """
    Q, R, piv = scipy.linalg.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    tol = max(X.shape) * np.finfo(np.float64).eps * (diag[0] if diag.size else 0.0)
    rank = int(np.sum(diag > tol))
    if rank < X.shape[1]:
        raise RankDeficiencyError([labels[i] for i in piv[rank:]])
    coef_p = scipy.linalg.solve_triangular(R, Q.T @ y)
    coef = np.empty_like(coef_p)
    coef[piv] = coef_p
    return coef, R, piv


def _xtx_inverse(R: np.ndarray, piv: np.ndarray) -> np.ndarray:
    # X P = Q R, so (X'X)^{-1} = P (R'R)^{-1} P'.
    Rinv = scipy.linalg.solve_triangular(R, np.eye(R.shape[1]))
    inner = Rinv @ Rinv.T
    out = np.empty_like(inner)
    out[np.ix_(piv, piv)] = inner
    return out


def _sandwich(bread: np.ndarray, scores: np.ndarray, clusters: np.ndarray | None) -> np.ndarray:
    if clusters is None:
        meat = scores.T @ scores
    else:
        order = np.argsort(clusters, kind="stable")
        sorted_scores = scores[order]
        boundaries = np.flatnonzero(np.diff(clusters[order])) + 1
        summed = np.add.reduceat(sorted_scores, np.r_[0, boundaries], axis=0)
        meat = summed.T @ summed
    return bread @ meat @ bread


def fit_model(spec: ModelSpec, frame: Frame, cov_kind: str = MODEL) -> FittedModel:
    """Fit a model spec to a frame.

    cov_kind selects the coefficient covariance: "model" (inverse
    information), "robust" (HC0 sandwich), or "cluster" (scores summed
    within frame.cluster_id before the outer product).
    """
    if cov_kind not in _COV_KINDS:
        raise SpecificationError(f"unknown covariance kind {cov_kind!r}")
    clusters = None
    if cov_kind == CLUSTER:
        if frame.cluster_id is None:
            raise DataError("cluster covariance requires frame cluster labels")
        clusters = frame.cluster_id
    frame.require([spec.response, *spec.columns_used])
    y = frame.data[spec.response]
    X, labels = build_design(spec, frame.data)
    n, p = X.shape
    if n <= p:
        raise DataError(f"need more rows ({n}) than parameters ({p})")

    if spec.family == GAUSSIAN:
        coef, R, piv = _qr_solve(X, y, labels)
        resid = y - X @ coef
        rss = float(resid @ resid)
        sigma2 = rss / (n - p)
        xtx_inv = _xtx_inverse(R, piv)
        if cov_kind == MODEL:
            cov = sigma2 * xtx_inv
        else:
            cov = _sandwich(xtx_inv, X * resid[:, None], clusters)
        return FittedModel(
            spec=spec,
            labels=labels,
            coef=coef,
            cov=cov,
            cov_kind=cov_kind,
            n_obs=n,
            rss=rss,
            residual_sd=float(np.sqrt(sigma2)),
        )

    if not np.all((y == 0.0) | (y == 1.0)):
        raise DataError("binomial response must be coded 0/1")
    # Rank check once on the unweighted design; IRLS reuses the design.
    _qr_solve(X, y, labels)
    coef = np.zeros(p)
    for iteration in range(1, _MAX_IRLS_ITERATIONS + 1):
        eta = X @ coef
        mu = expit(eta)
        score = X.T @ (y - mu)
        score_norm = float(np.max(np.abs(score)))
        if score_norm < _SCORE_TOL:
            break
        w = mu * (1.0 - mu)
        sw = np.sqrt(np.maximum(w, 1e-300))
        z = eta + (y - mu) / np.maximum(w, 1e-300)
        coef, _, _ = _qr_solve(X * sw[:, None], z * sw, labels)
        if np.max(np.abs(coef)) > _SEPARATION_BOUND:
            raise SeparationError(
                "logistic coefficients diverged; data are perfectly separated"
            )
    else:
        raise ConvergenceError(
            f"IRLS did not reach score tolerance {_SCORE_TOL:g} in "
            f"{_MAX_IRLS_ITERATIONS} iterations (score norm {score_norm:.3g})"
        )
    mu = expit(X @ coef)
    # A non-saturated model that classifies every row to machine precision
    # has no finite MLE: the score tolerance was met only because the
    # probabilities pinned at 0/1, not because the optimum exists.
    if np.max(np.abs(y - mu)) < 1e-6:
        raise SeparationError(
            "fitted probabilities are numerically 0 or 1 for every row; "
            "data are perfectly separated"
        )
    w = mu * (1.0 - mu)
    XtWX = (X * w[:, None]).T @ X
    try:
        info_inv = scipy.linalg.inv(XtWX)
    except scipy.linalg.LinAlgError as exc:
        raise SeparationError("information matrix is singular at the optimum") from exc
    if cov_kind == MODEL:
        cov = info_inv
    else:
        cov = _sandwich(info_inv, X * (y - mu)[:, None], clusters)
    return FittedModel(
        spec=spec,
        labels=labels,
        coef=coef,
        cov=cov,
        cov_kind=cov_kind,
        n_obs=n,
        iterations=iteration,
        score_norm=score_norm,
    )


def predict_mean(fm: FittedModel, data: Mapping[str, np.ndarray] | Frame) -> np.ndarray:
    """Mean response at the given rows (probability scale for binomial)."""
    eta = fm.linear_predictor(data)
    if fm.spec.family == BINOMIAL:
        return expit(eta)
    return eta


def response_from_noise(
    fm: FittedModel,
    data: Mapping[str, np.ndarray] | Frame,
    noise: np.ndarray,
) -> np.ndarray:
    """Response draw using caller-supplied noise.

    For gaussian models ``noise`` is standard normal; for binomial it is
    uniform on [0, 1). Sharing noise arrays across counterfactual arms
    gives common-random-number draws, which both reduces Monte Carlo
    variance and makes contrasts with identical arms exactly zero.
    """
    mean = predict_mean(fm, data)
    if fm.spec.family == GAUSSIAN:
        return mean + fm.residual_sd * noise
    return (noise < mean).astype(np.float64)


def simulate_response(
    fm: FittedModel,
    data: Mapping[str, np.ndarray] | Frame,
    rng: np.random.Generator,
) -> np.ndarray:
    """Draw responses from the fitted conditional distribution."""
    n = fm.design(data).shape[0]
    if fm.spec.family == GAUSSIAN:
        return response_from_noise(fm, data, rng.standard_normal(n))
    return response_from_noise(fm, data, rng.random(n))


def f_test_nested(full: FittedModel, restricted: FittedModel) -> tuple[float, int, int, float]:
    """RSS-difference F test of a nested gaussian restriction.

    Returns (F, df_numerator, df_denominator, p_value).
    """
    if full.spec.family != GAUSSIAN or restricted.spec.family != GAUSSIAN:
        raise SpecificationError("F tests apply to gaussian fits")
    if full.n_obs != restricted.n_obs:
        raise SpecificationError("nested fits must use the same rows")
    q = len(full.labels) - len(restricted.labels)
    if q <= 0:
        raise SpecificationError("restricted model must have fewer parameters")
    df2 = full.n_obs - len(full.labels)
    num = (restricted.rss - full.rss) / q
    den = full.rss / df2
    stat = float(num / den)
    p = float(scipy.stats.f.sf(stat, q, df2)) if stat > 0 else 1.0
    return stat, q, df2, p
