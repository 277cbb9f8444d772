"""Counterfactual effect estimation by regression standardization.

The estimands supported here are contrasts of counterfactual outcome
means under interventions on an exposure and, for mediation questions,
on mediator distributions:

- ``tce``: total causal effect, standardizing the outcome model over the
  observed covariate distribution.
- ``cde``: controlled direct effect with the mediator held at fixed
  values; intermediate confounders, when present, are integrated out by
  Monte Carlo draws from fitted sequential models.
- ``interventional``: direct and indirect effects defined by shifting
  the mediator distribution between exposure worlds. The convention is
  telescoping: IDE compares exposures with mediators drawn from the
  reference world, IIE compares mediator worlds at the exposed level,
  so IDE + IIE equals the total contrast as an arithmetic identity.
- ``interventional_multi``: block-wise decomposition for several
  mediator groups. Block effects shift one block's marginal mediator
  distribution at a time; the joint shift gives IIE_all; the remainder
  TCE - IDE - sum(IIE_k) collects whatever the additive block
  decomposition misses.
- ``cdm``: counterfactual disparity measure, the exposure-outcome
  contrast that would remain if the mediator were fixed, standardized
  within exposure strata.

All Monte Carlo draws use common random numbers across counterfactual
arms: contrasts with identical arms are exactly zero and the draw noise
largely cancels. Draw k of any stage uses a generator keyed by
(seed, stage, k), so estimates are reproducible bitwise no matter how
the loop is executed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from .errors import ConfigError, DataError, SpecificationError
from .frame import Frame
from .regression import (
    GAUSSIAN,
    FittedModel,
    ModelSpec,
    fit_model,
    predict_mean,
    response_from_noise,
)

TCE = "tce"
CDE = "cde"
INTERVENTIONAL = "interventional"
INTERVENTIONAL_MULTI = "interventional_multi"
CDM = "cdm"
KINDS = (TCE, CDE, INTERVENTIONAL, INTERVENTIONAL_MULTI, CDM)


def level_key(prefix: str, value: float) -> str:
    """Component key for a stratum-valued estimand, e.g. ``CDE(0.5)``."""
    return f"{prefix}({value:g})"


@dataclass
class EffectEstimate:
    """Named effect components with optional uncertainty.

    ``se`` and ``ci95`` are empty until filled by the bootstrap;
    diagnostics carry sample sizes, draw counts, and positivity flags.
    """

    components: dict[str, float]
    se: dict[str, float] = field(default_factory=dict)
    ci95: dict[str, tuple[float, float]] = field(default_factory=dict)
    diagnostics: dict[str, Any] = field(default_factory=dict)

    def as_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        for name, value in self.components.items():
            entry: dict[str, Any] = {"point": value}
            if name in self.se:
                entry["se"] = self.se[name]
            if name in self.ci95:
                entry["ci95"] = list(self.ci95[name])
            out[name] = entry
        return out


@dataclass(frozen=True)
class EstimandRequest:
    """Declarative description of a target contrast.

    Mediator blocks are ordered groups of mediator columns; mediator
    models are listed per column, flattened in block order, and each may
    condition on the exposure, baseline confounders, intermediate
    confounders, and any earlier mediator column.
    """

    kind: str
    exposure: str
    outcome_model: ModelSpec
    exposed: float = 1.0
    reference: float = 0.0
    confounders: tuple[str, ...] = ()
    mediator_blocks: tuple[tuple[str, ...], ...] = ()
    mediator_models: tuple[ModelSpec, ...] = ()
    intermediate_confounders: tuple[str, ...] = ()
    intermediate_models: tuple[ModelSpec, ...] = ()
    fixed_mediator_values: tuple[float, ...] = ()
    draws: int = 200

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown estimand kind {self.kind!r}")
        object.__setattr__(self, "confounders", tuple(self.confounders))
        object.__setattr__(
            self, "mediator_blocks", tuple(tuple(b) for b in self.mediator_blocks)
        )
        object.__setattr__(self, "mediator_models", tuple(self.mediator_models))
        object.__setattr__(
            self, "intermediate_confounders", tuple(self.intermediate_confounders)
        )
        object.__setattr__(self, "intermediate_models", tuple(self.intermediate_models))
        object.__setattr__(
            self, "fixed_mediator_values", tuple(float(v) for v in self.fixed_mediator_values)
        )
        _validate_request(self)

    @property
    def mediators(self) -> tuple[str, ...]:
        return tuple(c for block in self.mediator_blocks for c in block)

    @classmethod
    def from_config(cls, cfg: Mapping[str, Any]) -> "EstimandRequest":
        """Build a request from a plain configuration mapping."""

        def spec_from(entry) -> ModelSpec:
            # Bare strings are gaussian formulas; mappings may pick a family.
            if isinstance(entry, str):
                return ModelSpec.from_formula(entry, family=GAUSSIAN)
            if not isinstance(entry, Mapping) or "formula" not in entry:
                raise ConfigError("model entries need a 'formula' field")
            return ModelSpec.from_formula(
                entry["formula"], family=entry.get("family", GAUSSIAN)
            )

        known = {
            "kind",
            "exposure",
            "outcome_model",
            "exposed",
            "reference",
            "confounders",
            "mediator_blocks",
            "mediator_models",
            "intermediate_confounders",
            "intermediate_models",
            "fixed_mediator_values",
            "draws",
        }
        unknown = set(cfg) - known
        if unknown:
            raise ConfigError(f"unknown estimand fields: {sorted(unknown)}")
        try:
            outcome_model = spec_from(cfg["outcome_model"])
            return cls(
                kind=cfg["kind"],
                exposure=cfg["exposure"],
                outcome_model=outcome_model,
                exposed=float(cfg.get("exposed", 1.0)),
                reference=float(cfg.get("reference", 0.0)),
                confounders=tuple(cfg.get("confounders", ())),
                mediator_blocks=tuple(tuple(b) for b in cfg.get("mediator_blocks", ())),
                mediator_models=tuple(spec_from(m) for m in cfg.get("mediator_models", ())),
                intermediate_confounders=tuple(cfg.get("intermediate_confounders", ())),
                intermediate_models=tuple(
                    spec_from(m) for m in cfg.get("intermediate_models", ())
                ),
                fixed_mediator_values=tuple(cfg.get("fixed_mediator_values", ())),
                draws=int(cfg.get("draws", 200)),
            )
        except KeyError as exc:
            raise ConfigError(f"estimand request is missing field {exc.args[0]!r}") from exc
        except SpecificationError as exc:
            raise ConfigError(str(exc)) from exc


def _validate_request(req: EstimandRequest) -> None:
    mediators = req.mediators
    roles = {
        "exposure": (req.exposure,),
        "confounders": req.confounders,
        "mediators": mediators,
        "intermediate confounders": req.intermediate_confounders,
        "outcome": (req.outcome_model.response,),
    }
    seen: dict[str, str] = {}
    for role, cols in roles.items():
        for c in cols:
            if c in seen:
                raise ConfigError(f"column {c!r} appears as both {seen[c]} and {role}")
            seen[c] = role
    if len(set(mediators)) != len(mediators):
        raise ConfigError("mediator blocks repeat a column")
    if req.draws < 1:
        raise ConfigError("draws must be >= 1")
    if req.exposed == req.reference and req.kind == TCE:
        pass  # legal; contrast is exactly zero

    n_blocks = len(req.mediator_blocks)
    if req.kind == TCE:
        if n_blocks:
            raise ConfigError("tce takes no mediator blocks")
    elif req.kind in (CDE, CDM):
        if n_blocks != 1 or len(req.mediator_blocks[0]) != 1:
            raise ConfigError(f"{req.kind} needs exactly one single-column mediator block")
        if not req.fixed_mediator_values:
            raise ConfigError(f"{req.kind} needs at least one fixed mediator value")
    elif req.kind == INTERVENTIONAL:
        if n_blocks != 1:
            raise ConfigError("interventional takes exactly one mediator block")
    else:
        if n_blocks < 2:
            raise ConfigError("interventional_multi needs at least two mediator blocks")
        if req.intermediate_confounders:
            raise ConfigError(
                "interventional_multi draws mediators given (exposure, confounders) "
                "only; intermediate confounders are not supported"
            )

    if req.kind in (TCE, CDE, CDM) and req.mediator_models:
        raise ConfigError(f"{req.kind} takes no mediator models")
    if req.kind == TCE and req.intermediate_confounders:
        raise ConfigError("tce takes no intermediate confounders; list them as confounders")
    if req.kind == CDM and req.intermediate_models:
        raise ConfigError("cdm standardizes over observed intermediate confounders")
    if req.intermediate_models and not req.intermediate_confounders:
        raise ConfigError("intermediate models given without intermediate confounders")
    if req.kind in (INTERVENTIONAL, INTERVENTIONAL_MULTI):
        responses = tuple(m.response for m in req.mediator_models)
        if responses != mediators:
            raise ConfigError(
                "mediator models must match mediator columns in block order; "
                f"got responses {responses}, blocks flatten to {mediators}"
            )
        allowed = {req.exposure, *req.confounders, *req.intermediate_confounders}
        for m in req.mediator_models:
            for c in m.columns_used:
                if c not in allowed and c not in mediators[: mediators.index(m.response)]:
                    raise ConfigError(
                        f"mediator model for {m.response!r} conditions on {c!r}, which is "
                        "neither exposure, a confounder, nor an earlier mediator"
                    )
    l_responses = tuple(m.response for m in req.intermediate_models)
    if req.kind in (CDE, INTERVENTIONAL) and req.intermediate_confounders:
        if l_responses != req.intermediate_confounders:
            raise ConfigError(
                "intermediate models must match intermediate confounders in order"
            )
        allowed = {req.exposure, *req.confounders}
        for i, m in enumerate(req.intermediate_models):
            for c in m.columns_used:
                if c not in allowed and c not in req.intermediate_confounders[:i]:
                    raise ConfigError(
                        f"intermediate model for {m.response!r} conditions on {c!r}, "
                        "which is neither exposure, a confounder, nor an earlier draw"
                    )

    out_cols = set(req.outcome_model.columns_used)
    if req.exposure not in out_cols:
        raise ConfigError("outcome model must include the exposure")
    missing = [c for c in req.confounders if c not in out_cols]
    if missing:
        raise ConfigError("outcome model must include all confounders; missing: " + ", ".join(missing))
    if req.kind in (CDE, CDM, INTERVENTIONAL, INTERVENTIONAL_MULTI):
        missing = [c for c in mediators if c not in out_cols]
        if missing:
            raise ConfigError(
                "outcome model must include the mediator columns; missing: " + ", ".join(missing)
            )
    allowed_out = {req.exposure, *req.confounders, *mediators, *req.intermediate_confounders}
    extra = [c for c in out_cols if c not in allowed_out]
    if extra:
        raise ConfigError(
            "outcome model uses columns with no declared role: " + ", ".join(sorted(extra))
        )


def _draw_rng(seed: int, stage: int, k: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, stage, k)))


def _positivity(req: EstimandRequest, frame: Frame) -> dict[str, Any]:
    a = frame.column(req.exposure)
    lo, hi = float(a.min()), float(a.max())
    flags = {
        "exposed_in_support": bool(lo <= req.exposed <= hi),
        "reference_in_support": bool(lo <= req.reference <= hi),
    }
    if req.kind in (CDE, CDM):
        m = frame.column(req.mediators[0])
        mlo, mhi = float(m.min()), float(m.max())
        flags["mediator_values_in_support"] = bool(
            all(mlo <= v <= mhi for v in req.fixed_mediator_values)
        )
    flags["ok"] = all(flags.values())
    return flags


def _base_diagnostics(req: EstimandRequest, frame: Frame) -> dict[str, Any]:
    return {
        "n_obs": frame.n_rows,
        "kind": req.kind,
        "positivity": _positivity(req, frame),
    }


def _check_kind(req: EstimandRequest, expected: str) -> None:
    if req.kind != expected:
        raise ConfigError(f"request kind is {req.kind!r}, expected {expected!r}")


def _context(frame: Frame) -> dict[str, np.ndarray]:
    return dict(frame.data)


class _Drawer:
    """Sequential Monte Carlo draws with common random numbers.

    Fits one model per column to draw and replays stored noise arrays so
    that different counterfactual arms see identical randomness.
    """

    def __init__(self, models: Sequence[FittedModel], seed: int, stage_base: int):
        self.models = list(models)
        self.seed = seed
        self.stage_base = stage_base

    def noise(self, k: int, n: int) -> list[np.ndarray]:
        out = []
        for j, fm in enumerate(self.models):
            rng = _draw_rng(self.seed, self.stage_base + j, k)
            out.append(rng.standard_normal(n) if fm.spec.family == GAUSSIAN else rng.random(n))
        return out

    def draw_into(self, context: dict[str, np.ndarray], noise: list[np.ndarray]) -> None:
        for fm, eps in zip(self.models, noise):
            context[fm.spec.response] = response_from_noise(fm, context, eps)


def estimate_tce(req: EstimandRequest, frame: Frame, seed: int = 0) -> EffectEstimate:
    """Total causal effect by standardizing the outcome regression."""
    _check_kind(req, TCE)
    frame.require([req.exposure, req.outcome_model.response, *req.confounders])
    fm = fit_model(req.outcome_model, frame)
    value = _tce_from_fit(fm, frame, req.exposure, req.exposed, req.reference)
    diag = _base_diagnostics(req, frame)
    return EffectEstimate(components={"TCE": value}, diagnostics=diag)


def _tce_from_fit(
    fm: FittedModel, frame: Frame, exposure: str, exposed: float, reference: float
) -> float:
    n = frame.n_rows
    context = _context(frame)
    context[exposure] = np.full(n, exposed)
    mean_a = float(np.mean(predict_mean(fm, context)))
    context[exposure] = np.full(n, reference)
    mean_ref = float(np.mean(predict_mean(fm, context)))
    return mean_a - mean_ref


def estimate_cde(req: EstimandRequest, frame: Frame, seed: int = 0) -> EffectEstimate:
    """Controlled direct effect at each requested mediator value.

    Without intermediate confounders the standardization is exact; with
    them, draws from the fitted sequential models integrate them out
    (``draws`` Monte Carlo replicates, common random numbers across
    exposure arms).
    """
    _check_kind(req, CDE)
    mediator = req.mediators[0]
    frame.require(
        [req.exposure, mediator, req.outcome_model.response,
         *req.confounders, *req.intermediate_confounders]
    )
    outcome = fit_model(req.outcome_model, frame)
    n = frame.n_rows
    values = req.fixed_mediator_values

    if not req.intermediate_confounders:
        sums = {}
        for x in (req.exposed, req.reference):
            context = _context(frame)
            context[req.exposure] = np.full(n, x)
            for v in values:
                context[mediator] = np.full(n, v)
                sums[(x, v)] = float(np.mean(predict_mean(outcome, context)))
        components = {
            level_key("CDE", v): sums[(req.exposed, v)] - sums[(req.reference, v)]
            for v in values
        }
        diag = _base_diagnostics(req, frame)
        return EffectEstimate(components=components, diagnostics=diag)

    inter = [fit_model(m, frame) for m in req.intermediate_models]
    drawer = _Drawer(inter, seed, stage_base=100)
    totals = {(x, v): 0.0 for x in (req.exposed, req.reference) for v in values}
    for k in range(req.draws):
        noise = drawer.noise(k, n)
        for x in (req.exposed, req.reference):
            context = _context(frame)
            context[req.exposure] = np.full(n, x)
            drawer.draw_into(context, noise)
            for v in values:
                context[mediator] = np.full(n, v)
                totals[(x, v)] += float(np.mean(predict_mean(outcome, context)))
    components = {
        level_key("CDE", v): (totals[(req.exposed, v)] - totals[(req.reference, v)]) / req.draws
        for v in values
    }
    diag = _base_diagnostics(req, frame)
    diag["draws"] = req.draws
    return EffectEstimate(components=components, diagnostics=diag)


def estimate_interventional(req: EstimandRequest, frame: Frame, seed: int = 0) -> EffectEstimate:
    """Interventional direct and indirect effects for one mediator block.

    mu(x, g) averages outcome predictions at exposure x with mediators
    drawn under exposure g (and intermediate confounders drawn under x).
    Components: IDE = mu(a, a*) - mu(a*, a*), IIE = mu(a, a) - mu(a, a*),
    total = IDE + IIE exactly.
    """
    _check_kind(req, INTERVENTIONAL)
    frame.require(
        [req.exposure, req.outcome_model.response, *req.confounders,
         *req.mediators, *req.intermediate_confounders]
    )
    outcome = fit_model(req.outcome_model, frame)
    inter = [fit_model(m, frame) for m in req.intermediate_models]
    meds = [fit_model(m, frame) for m in req.mediator_models]
    l_drawer = _Drawer(inter, seed, stage_base=100)
    m_drawer = _Drawer(meds, seed, stage_base=200)
    a, ref = req.exposed, req.reference
    n = frame.n_rows

    # Arms (x, g): exposure for the outcome world, exposure for the draw.
    arms = ((a, ref), (ref, ref), (a, a))
    totals = dict.fromkeys(arms, 0.0)
    for k in range(req.draws):
        l_noise = l_drawer.noise(k, n)
        m_noise = m_drawer.noise(k, n)
        l_worlds: dict[float, dict[str, np.ndarray]] = {}
        for x in (a, ref):
            context = _context(frame)
            context[req.exposure] = np.full(n, x)
            l_drawer.draw_into(context, l_noise)
            l_worlds[x] = context
        for x, g in arms:
            context = dict(l_worlds[x])
            context[req.exposure] = np.full(n, g)
            m_drawer.draw_into(context, m_noise)
            context[req.exposure] = l_worlds[x][req.exposure]
            totals[(x, g)] += float(np.mean(predict_mean(outcome, context)))
    mu = {arm: s / req.draws for arm, s in totals.items()}
    ide = mu[(a, ref)] - mu[(ref, ref)]
    iie = mu[(a, a)] - mu[(a, ref)]
    components = {"IDE": ide, "IIE": iie, "total": mu[(a, a)] - mu[(ref, ref)]}
    diag = _base_diagnostics(req, frame)
    diag["draws"] = req.draws
    return EffectEstimate(components=components, diagnostics=diag)


def _marginalize(spec: ModelSpec, allowed: set[str]) -> ModelSpec:
    """Drop terms that reference columns outside ``allowed``.

    Used to turn a sequential mediator model into the marginal-over-
    other-blocks model refit directly on the data.
    """
    kept = tuple(t for t in spec.terms if all(c in allowed for c in t.cols))
    return ModelSpec(response=spec.response, family=spec.family, terms=kept)


def _reduced_outcome_spec(req: EstimandRequest) -> ModelSpec:
    allowed = {req.exposure, *req.confounders}
    spec = _marginalize(req.outcome_model, allowed)
    if req.exposure not in spec.columns_used:
        raise ConfigError("outcome model has no exposure term that survives reduction")
    return spec


def estimate_interventional_multi(
    req: EstimandRequest, frame: Frame, seed: int = 0
) -> EffectEstimate:
    """Block-wise interventional decomposition with a remainder.

    Joint draws walk all mediator models in block order; per-block
    effects use marginal models (terms involving other blocks dropped,
    refit), shifting one block's exposure world at a time with the
    others held at their reference marginals. TCE comes from the reduced
    outcome model on the same rows; remainder = TCE - IDE - sum(IIE_k).
    """
    _check_kind(req, INTERVENTIONAL_MULTI)
    frame.require(
        [req.exposure, req.outcome_model.response, *req.confounders, *req.mediators]
    )
    outcome = fit_model(req.outcome_model, frame)
    joint = [fit_model(m, frame) for m in req.mediator_models]
    blocks = req.mediator_blocks
    a, ref = req.exposed, req.reference
    n = frame.n_rows

    block_of = {}
    for b, cols in enumerate(blocks):
        for c in cols:
            block_of[c] = b
    marginal_models = []
    for m in req.mediator_models:
        b = block_of[m.response]
        allowed = {req.exposure, *req.confounders, *blocks[b]}
        marginal_models.append(fit_model(_marginalize(m, allowed), frame))

    joint_drawer = _Drawer(joint, seed, stage_base=200)
    marg_drawer = _Drawer(marginal_models, seed, stage_base=200)  # shared noise

    def tile_exposure(x):
        return np.full(n, x)

    totals: dict[str, float] = {}

    def accumulate(name, context, x):
        context[req.exposure] = tile_exposure(x)
        totals[name] = totals.get(name, 0.0) + float(np.mean(predict_mean(outcome, context)))

    for k in range(req.draws):
        noise = joint_drawer.noise(k, n)
        joint_worlds = {}
        for g in (a, ref):
            context = _context(frame)
            context[req.exposure] = tile_exposure(g)
            joint_drawer.draw_into(context, noise)
            joint_worlds[g] = context
        accumulate("a_joint_ref", dict(joint_worlds[ref]), a)
        accumulate("ref_joint_ref", dict(joint_worlds[ref]), ref)
        accumulate("a_joint_a", dict(joint_worlds[a]), a)

        marg_worlds = {}
        for g in (a, ref):
            context = _context(frame)
            context[req.exposure] = tile_exposure(g)
            marg_drawer.draw_into(context, noise)
            marg_worlds[g] = context
        base = dict(marg_worlds[ref])
        accumulate("a_marg_ref", base, a)
        for b, cols in enumerate(blocks):
            shifted = dict(marg_worlds[ref])
            for c in cols:
                shifted[c] = marg_worlds[a][c]
            accumulate(f"a_marg_shift_{b}", shifted, a)

    mu = {name: s / req.draws for name, s in totals.items()}
    ide = mu["a_joint_ref"] - mu["ref_joint_ref"]
    iie_all = mu["a_joint_a"] - mu["a_joint_ref"]
    components = {"IDE": ide, "IIE_all": iie_all}
    iie_sum = 0.0
    for b in range(len(blocks)):
        val = mu[f"a_marg_shift_{b}"] - mu["a_marg_ref"]
        components[f"IIE_{b + 1}"] = val
        iie_sum += val

    reduced = fit_model(_reduced_outcome_spec(req), frame)
    tce = _tce_from_fit(reduced, frame, req.exposure, a, ref)
    components["TCE"] = tce
    components["remainder"] = tce - ide - iie_sum
    diag = _base_diagnostics(req, frame)
    diag["draws"] = req.draws
    return EffectEstimate(components=components, diagnostics=diag)


def estimate_cdm(req: EstimandRequest, frame: Frame, seed: int = 0) -> EffectEstimate:
    """Counterfactual disparity measure at fixed mediator values.

    Standardizes within the exposed and unexposed strata over their
    observed covariate (and intermediate confounder) distributions, with
    the mediator column held fixed. Exposure must be binary 0/1.
    """
    _check_kind(req, CDM)
    mediator = req.mediators[0]
    frame.require(
        [req.exposure, mediator, req.outcome_model.response,
         *req.confounders, *req.intermediate_confounders]
    )
    x = frame.column(req.exposure)
    if not np.all((x == 0.0) | (x == 1.0)):
        raise DataError("cdm requires a binary 0/1 exposure column")
    if {req.exposed, req.reference} != {0.0, 1.0}:
        raise ConfigError("cdm contrasts exposure 1 against 0")
    masks = {1.0: x == 1.0, 0.0: x == 0.0}
    if not masks[1.0].any() or not masks[0.0].any():
        raise DataError("both exposure strata must be non-empty")
    outcome = fit_model(req.outcome_model, frame)
    components = {}
    for v in req.fixed_mediator_values:
        means = {}
        for lvl, mask in masks.items():
            context = {name: col[mask] for name, col in frame.data.items()}
            context[mediator] = np.full(int(mask.sum()), v)
            means[lvl] = float(np.mean(predict_mean(outcome, context)))
        components[level_key("CDM", v)] = means[1.0] - means[0.0]
    diag = _base_diagnostics(req, frame)
    diag["stratum_sizes"] = {"exposed": int(masks[1.0].sum()), "reference": int(masks[0.0].sum())}
    return EffectEstimate(components=components, diagnostics=diag)


_DISPATCH = {
    TCE: estimate_tce,
    CDE: estimate_cde,
    INTERVENTIONAL: estimate_interventional,
    INTERVENTIONAL_MULTI: estimate_interventional_multi,
    CDM: estimate_cdm,
}


def estimate(req: EstimandRequest, frame: Frame, seed: int = 0) -> EffectEstimate:
    """Dispatch a request to its estimator."""
    return _DISPATCH[req.kind](req, frame, seed=seed)


def bootstrap_estimate(req: EstimandRequest, frame: Frame, plan) -> EffectEstimate:
    """Estimate with bootstrap standard errors and intervals.

    The point estimate uses the same derived seed the bootstrap hands
    the original-frame evaluation, so the reported components match the
    resampling run bitwise.
    """
    from .bootstrap import bootstrap, derive_seed

    full = estimate(req, frame, seed=derive_seed(plan.seed, 2))
    result = bootstrap(plan, frame, lambda fr, s: estimate(req, fr, seed=s).components)
    full.se.update(result.se)
    full.ci95.update(result.ci95)
    full.diagnostics["bootstrap"] = {
        "replicates": plan.replicates,
        "mode": plan.mode,
        "ci": plan.ci,
        "n_used": result.n_used,
        "n_failed": result.n_failed,
    }
    return full


def sem_paths(
    outcome_model: FittedModel,
    mediator_models: Sequence[FittedModel],
    exposure: str,
) -> EffectEstimate:
    """Closed-form path decomposition for linear main-effects systems.

    The direct effect is the exposure coefficient in the outcome model;
    each indirect path contributes the product of its coefficients; the
    total is their sum. Refuses models with interactions, powers, or a
    non-gaussian family, where the product rule does not hold.
    """
    models = [*mediator_models, outcome_model]
    responses = [m.spec.response for m in models]
    if len(set(responses)) != len(responses):
        raise SpecificationError("models must have distinct responses")
    if exposure in responses:
        raise SpecificationError("exposure cannot be a model response")
    for m in models:
        if m.spec.family != GAUSSIAN:
            raise SpecificationError("path decomposition requires gaussian models")
        for t in m.spec.terms:
            if len(t.cols) > 1 or t.exponent > 1:
                raise SpecificationError(
                    f"path decomposition requires main-effects models; "
                    f"{m.spec.response!r} has term {t.label!r}"
                )

    outcome = outcome_model.spec.response
    edges: dict[str, dict[str, float]] = {}
    for m in models:
        for t in m.spec.terms:
            if t.cols:
                edges.setdefault(t.cols[0], {})[m.spec.response] = m.coefficient(t.label)

    mediator_set = {m.spec.response for m in mediator_models}
    paths: dict[str, float] = {}

    def walk(node: str, trail: list[str], product: float) -> None:
        for nxt, coef in edges.get(node, {}).items():
            if nxt == outcome:
                paths["->".join(trail + [outcome])] = product * coef
            elif nxt in mediator_set and nxt not in trail:
                walk(nxt, trail + [nxt], product * coef)

    walk(exposure, [exposure], 1.0)
    direct = paths.get(f"{exposure}->{outcome}", 0.0)
    indirect = sum(v for k, v in paths.items() if k != f"{exposure}->{outcome}")
    components = {"direct": direct, "indirect": indirect, "total": direct + indirect}
    return EffectEstimate(
        components=components,
        diagnostics={"paths": paths, "exposure": exposure, "outcome": outcome},
    )
