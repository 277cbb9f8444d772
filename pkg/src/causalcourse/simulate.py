"""Synthetic data generators with known causal truths.

Each kind is a small structural equation system whose target quantities
are available through :func:`truth`, either in closed form (linear kinds,
by path expansion) or by direct counterfactual propagation through the
generator itself (the nonlinear ``growth_cohort`` kind). Estimator tests
and acceptance checks compare fitted estimates against these truths.

Determinism: generation is a pure function of (spec, n, seed). Every
variable draws from its own counter-based Philox stream keyed by
(seed, stream index), so results do not depend on thread count, chunking,
or the order in which columns are materialized.

Kinds
-----
linear_chain
    C -> A1 -> L -> A2 -> Y with all arrows forward; the worked default
    for total-effect checks. Noise variances are calibrated so every
    variable has unit marginal variance.
three_node
    Exposure, one mediator, outcome; minimal mediation benchmark.
parallel_mediators
    Two mediators, optionally linked, for multi-block decompositions.
lifecourse
    Two exposures A1, A2 with tracking and a configurable interaction.
growth_cohort
    Birth size exposure, six tracked adiposity measures, five confounder
    components, and a nonlinear outcome (quadratic + interaction).
twin_pairs
    Paired rows sharing a latent confounder, optional non-shared
    confounder V.
mr_summary
    Per-variant summary statistics for instrumental-variable regression
    (one row per variant, not per subject).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import ConfigError
from .frame import BINARY, CONTINUOUS, Frame

KINDS = (
    "linear_chain",
    "three_node",
    "parallel_mediators",
    "lifecourse",
    "growth_cohort",
    "twin_pairs",
    "mr_summary",
)


@dataclass(frozen=True)
class DgpSpec:
    """A generator kind plus parameter overrides (defaults documented per kind)."""

    kind: str
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown DGP kind {self.kind!r}; choose from {KINDS}")
        defaults = _DEFAULTS[self.kind]
        unknown = set(self.params) - set(defaults)
        if unknown:
            raise ConfigError(
                f"unknown parameters for {self.kind!r}: {sorted(unknown)}"
            )
        merged = dict(defaults)
        merged.update({k: float(v) for k, v in self.params.items()})
        object.__setattr__(self, "params", merged)


_DEFAULTS: dict[str, dict[str, float]] = {
    "linear_chain": {},
    "three_node": {"alpha": 0.4, "gamma": 0.25, "delta": 0.1},
    "parallel_mediators": {
        "a_on_m1": 0.5,
        "a_on_m2": 0.3,
        "m1_on_m2": 0.0,
        "m1_on_y": 0.25,
        "m2_on_y": 0.2,
        "direct": 0.1,
        "noise_m": 0.8,
        "noise_y": 1.0,
    },
    "lifecourse": {
        "b0": 0.0,
        "b1": 0.3,
        "b2": 0.3,
        "b3": 0.0,
        "tracking": 0.4,
        "noise_y": 1.0,
    },
    "growth_cohort": {
        "tracking": 0.8,
        "direct": 0.03,
        "driver_coef": 0.18,
        "quad": 0.05,
        "interaction": 0.08,
        "driver_last": 1.0,  # 1: outcome driven by the last measure; 0: by the mean
    },
    "twin_pairs": {
        "effect": 0.25,
        "u_on_x": 0.7,
        "u_on_y": 0.5,
        "v_on_x": 0.0,
        "v_on_y": 0.0,
    },
    "mr_summary": {
        "slope": 0.3,
        "pleiotropy": 0.0,
        "beta_lo": 0.05,
        "beta_hi": 0.25,
        "se_out_lo": 0.01,
        "se_out_hi": 0.05,
        "se_exp_lo": 0.01,
        "se_exp_hi": 0.03,
    },
}


def _rng(seed: int, stream: int) -> np.random.Generator:
    if seed < 0:
        raise ConfigError("seed must be a non-negative integer")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, stream))))


def _normals(seed: int, n: int, count: int) -> list[np.ndarray]:
    return [_rng(seed, i).standard_normal(n) for i in range(count)]


# --------------------------------------------------------------------------
# linear_chain

# Structural coefficients; noise sds solve for unit marginal variances.
_CHAIN_NOISE_SD = {
    "c": 1.0,
    "a1": np.sqrt(0.75),
    "l": np.sqrt(0.81),
    "a2": np.sqrt(0.492),
    "y": np.sqrt(0.54975),
}


def _gen_linear_chain(n: int, seed: int) -> Frame:
    ec, e1, el, e2, ey = _normals(seed, n, 5)
    c = _CHAIN_NOISE_SD["c"] * ec
    a1 = 0.5 * c + _CHAIN_NOISE_SD["a1"] * e1
    l = 0.3 * a1 + 0.2 * c + _CHAIN_NOISE_SD["l"] * el
    a2 = 0.4 * a1 + 0.3 * l + 0.2 * c + _CHAIN_NOISE_SD["a2"] * e2
    y = 0.1 * a1 + 0.25 * a2 + 0.2 * l + 0.3 * c + _CHAIN_NOISE_SD["y"] * ey
    return Frame(
        data={"c": c, "a1": a1, "l": l, "a2": a2, "y": y},
        kinds={k: CONTINUOUS for k in ("c", "a1", "l", "a2", "y")},
    )


def _truth_linear_chain(params, estimand, **kw):
    if estimand == "TCE":
        # A1 -> Y plus A1 -> A2 -> Y, A1 -> L -> A2 -> Y, A1 -> L -> Y.
        return 0.1 + 0.25 * (0.4 + 0.3 * 0.3) + 0.2 * 0.3
    raise ConfigError(f"no closed-form truth for {estimand!r} in linear_chain")


# --------------------------------------------------------------------------
# three_node


def _gen_three_node(n: int, seed: int, p) -> Frame:
    ea, em, ey = _normals(seed, n, 3)
    a = ea
    m = p["alpha"] * a + np.sqrt(max(0.05, 1 - p["alpha"] ** 2)) * em
    vy = p["delta"] ** 2 + p["gamma"] ** 2 + 2 * p["delta"] * p["gamma"] * p["alpha"]
    y = p["delta"] * a + p["gamma"] * m + np.sqrt(max(0.05, 1 - vy)) * ey
    return Frame(
        data={"a": a, "m": m, "y": y},
        kinds={k: CONTINUOUS for k in ("a", "m", "y")},
    )


def _truth_three_node(p, estimand, **kw):
    table = {
        "IDE": p["delta"],
        "IIE": p["alpha"] * p["gamma"],
        "total": p["delta"] + p["alpha"] * p["gamma"],
        "TCE": p["delta"] + p["alpha"] * p["gamma"],
    }
    if estimand not in table:
        raise ConfigError(f"no closed-form truth for {estimand!r} in three_node")
    return table[estimand]


# --------------------------------------------------------------------------
# parallel_mediators


def _gen_parallel_mediators(n: int, seed: int, p) -> Frame:
    ea, e1, e2, ey = _normals(seed, n, 4)
    a = ea
    m1 = p["a_on_m1"] * a + p["noise_m"] * e1
    m2 = p["a_on_m2"] * a + p["m1_on_m2"] * m1 + p["noise_m"] * e2
    y = (
        p["direct"] * a
        + p["m1_on_y"] * m1
        + p["m2_on_y"] * m2
        + p["noise_y"] * ey
    )
    return Frame(
        data={"a": a, "m1": m1, "m2": m2, "y": y},
        kinds={k: CONTINUOUS for k in ("a", "m1", "m2", "y")},
    )


def _truth_parallel_mediators(p, estimand, **kw):
    m2_response = p["a_on_m2"] + p["m1_on_m2"] * p["a_on_m1"]
    iie1 = p["a_on_m1"] * p["m1_on_y"]  # m2 held at its reference marginal
    iie2 = m2_response * p["m2_on_y"]
    table = {
        "IDE": p["direct"],
        "IIE_1": iie1,
        "IIE_2": iie2,
        "IIE_all": iie1 + iie2,
        "TCE": p["direct"] + iie1 + iie2,
        "remainder": 0.0,
    }
    if estimand not in table:
        raise ConfigError(f"no closed-form truth for {estimand!r} in parallel_mediators")
    return table[estimand]


# --------------------------------------------------------------------------
# lifecourse


def _gen_lifecourse(n: int, seed: int, p) -> Frame:
    ea1, ea2, ey = _normals(seed, n, 3)
    rho = p["tracking"]
    if not -1.0 < rho < 1.0:
        raise ConfigError("tracking must be in (-1, 1)")
    a1 = ea1
    a2 = rho * a1 + np.sqrt(1 - rho**2) * ea2
    y = p["b0"] + p["b1"] * a1 + p["b2"] * a2 + p["b3"] * a1 * a2 + p["noise_y"] * ey
    return Frame(
        data={"a1": a1, "a2": a2, "y": y},
        kinds={k: CONTINUOUS for k in ("a1", "a2", "y")},
    )


def _truth_lifecourse(p, estimand, **kw):
    if estimand == "CDE_1":
        return p["b1"] + p["b3"] * float(kw.get("a2", 0.0))
    table = {
        "TCE_1": p["b1"] + p["b2"] * p["tracking"] + p["b3"] * p["tracking"],
        "TCE_2": p["b2"],
    }
    if estimand not in table:
        raise ConfigError(f"no closed-form truth for {estimand!r} in lifecourse")
    return table[estimand]


# --------------------------------------------------------------------------
# growth_cohort

_GROWTH_AGES = (7, 8, 9, 10, 11, 12)
_BMI_COLS = tuple(f"bmi{t}" for t in _GROWTH_AGES)
_CONF_COLS = ("c1", "c2", "c3", "c4", "c5")
# Loadings of confounder components on exposure, first measure, and outcome.
_BW_CONF = (0.10, -0.15, 0.05, 0.20, 0.10)
_BMI_CONF = (0.10, 0.10, 0.05, 0.20, 0.05)
_Y_CONF = (0.05, 0.05, 0.02, 0.08, 0.03)
_BW_ON_FIRST = 0.25
_BW_TRACK_LOAD = 0.05
_C4_TRACK_LOAD = 0.03
_NOISE_BW = 0.9
_NOISE_FIRST = 0.8
_NOISE_TRACK = 0.5
_NOISE_Y = 0.7


def _growth_confounders(n: int, seed: int) -> list[np.ndarray]:
    probs = (0.3, 0.5, 0.2)
    cols = [( _rng(seed, i).random(n) < probs[i]).astype(np.float64) for i in range(3)]
    cols += [_rng(seed, 3 + i).standard_normal(n) for i in range(2)]
    return cols


def _growth_noise(n: int, seed: int, base: int) -> dict[str, np.ndarray]:
    noise = {"bw": _rng(seed, base).standard_normal(n)}
    for j, col in enumerate(_BMI_COLS):
        noise[col] = _rng(seed, base + 1 + j).standard_normal(n)
    noise["y"] = _rng(seed, base + 1 + len(_BMI_COLS)).standard_normal(n)
    return noise


def _growth_bw(conf, noise):
    bw = _NOISE_BW * noise["bw"]
    for load, c in zip(_BW_CONF, conf):
        bw = bw + load * c
    return bw


def _growth_bmis(bw, conf, noise, p):
    first = _BW_ON_FIRST * bw + _NOISE_FIRST * noise[_BMI_COLS[0]]
    for load, c in zip(_BMI_CONF, conf):
        first = first + load * c
    bmis = [first]
    for col in _BMI_COLS[1:]:
        nxt = (
            p["tracking"] * bmis[-1]
            + _BW_TRACK_LOAD * bw
            + _C4_TRACK_LOAD * conf[3]
            + _NOISE_TRACK * noise[col]
        )
        bmis.append(nxt)
    return bmis


def _growth_outcome(bw, bmis, conf, noise_y, p):
    if p["driver_last"]:
        driver = bmis[-1]
    else:
        driver = sum(bmis) / len(bmis)
    y = (
        p["direct"] * bw
        + p["driver_coef"] * driver
        + p["quad"] * driver**2
        + p["interaction"] * bw * driver
        + _NOISE_Y * noise_y
    )
    for load, c in zip(_Y_CONF, conf):
        y = y + load * c
    return y


def _gen_growth_cohort(n: int, seed: int, p) -> Frame:
    conf = _growth_confounders(n, seed)
    noise = _growth_noise(n, seed, base=5)
    bw = _growth_bw(conf, noise)
    bmis = _growth_bmis(bw, conf, noise, p)
    y = _growth_outcome(bw, bmis, conf, noise["y"], p)
    data = dict(zip(_CONF_COLS, conf))
    data["bw"] = bw
    data.update(zip(_BMI_COLS, bmis))
    data["y"] = y
    kinds = {c: BINARY for c in _CONF_COLS[:3]}
    kinds.update({c: CONTINUOUS for c in _CONF_COLS[3:]})
    kinds.update({c: CONTINUOUS for c in ("bw", *_BMI_COLS, "y")})
    return Frame(data=data, kinds=kinds)


_GROWTH_DEFAULT_BLOCKS = (("bmi7", "bmi8", "bmi9"), ("bmi10", "bmi11", "bmi12"))


def _truth_growth_cohort(p, estimand, **kw):
    """Counterfactual Monte Carlo through the structural equations.

    Outcome noise enters linearly, so it is dropped; mediator noise is
    kept because the quadratic and interaction terms make the mean
    depend on it. One draw per simulated subject; with the default
    n = 10^6 the Monte Carlo error is a few 1e-3 at most.
    """
    a = float(kw.get("a", 1.0))
    a_ref = float(kw.get("a_ref", 0.0))
    n = int(kw.get("n", 1_000_000))
    seed = int(kw.get("seed", 20240601))
    blocks = tuple(tuple(b) for b in kw.get("blocks", _GROWTH_DEFAULT_BLOCKS))
    chunk = 200_000
    total = 0.0
    done = 0
    piece = 0
    while done < n:
        m = min(chunk, n - done)
        total += m * _truth_growth_chunk(p, estimand, a, a_ref, m, seed + 7919 * piece, blocks)
        done += m
        piece += 1
    return total / n


def _truth_growth_chunk(p, estimand, a, a_ref, n, seed, blocks):
    conf = _growth_confounders(n, seed)
    zero = np.zeros(n)

    def bmis_under(x, noise):
        return _growth_bmis(np.full(n, x), conf, noise, p)

    def outcome_at(x, bmis):
        return float(np.mean(_growth_outcome(np.full(n, x), bmis, conf, zero, p)))

    if estimand == "TCE":
        noise = _growth_noise(n, seed, base=5)
        return outcome_at(a, bmis_under(a, noise)) - outcome_at(a_ref, bmis_under(a_ref, noise))

    if estimand in ("IDE", "IIE_all"):
        noise = _growth_noise(n, seed, base=5)
        world_a = bmis_under(a, noise)
        world_ref = bmis_under(a_ref, noise)
        if estimand == "IDE":
            return outcome_at(a, world_ref) - outcome_at(a_ref, world_ref)
        return outcome_at(a, world_a) - outcome_at(a, world_ref)

    if estimand.startswith("IIE_"):
        k = int(estimand.split("_")[1]) - 1
        if not 0 <= k < len(blocks):
            raise ConfigError(f"block index out of range in {estimand!r}")
        # Independent worlds per block realize the product of block marginals.
        worlds = []
        for b in range(len(blocks)):
            noise_b = _growth_noise(n, seed, base=5 + 20 * (b + 1))
            worlds.append((bmis_under(a, noise_b), bmis_under(a_ref, noise_b)))
        col_to_block = {}
        for b, cols in enumerate(blocks):
            for c in cols:
                col_to_block[c] = b
        uncovered = [c for c in _BMI_COLS if c not in col_to_block]
        if uncovered:
            raise ConfigError(
                "truth blocks must cover every measure column; missing: "
                + ", ".join(uncovered)
            )

        def assemble(shifted_block):
            out = []
            for j, col in enumerate(_BMI_COLS):
                b = col_to_block[col]
                world_a_b, world_ref_b = worlds[b]
                out.append(world_a_b[j] if b == shifted_block else world_ref_b[j])
            return out

        shifted = assemble(k)
        reference = [worlds[col_to_block[c]][1][j] for j, c in enumerate(_BMI_COLS)]
        return outcome_at(a, shifted) - outcome_at(a, reference)

    raise ConfigError(f"no truth evaluator for {estimand!r} in growth_cohort")


# --------------------------------------------------------------------------
# twin_pairs


def _gen_twin_pairs(n: int, seed: int, p) -> Frame:
    if n % 2 != 0:
        raise ConfigError("twin_pairs needs an even number of rows")
    pairs = n // 2
    u = np.repeat(_rng(seed, 0).standard_normal(pairs), 2)
    v = _rng(seed, 1).standard_normal(n)
    ex = _rng(seed, 2).standard_normal(n)
    ey = _rng(seed, 3).standard_normal(n)
    sd_x = np.sqrt(max(0.05, 1 - p["u_on_x"] ** 2 - p["v_on_x"] ** 2))
    x = p["u_on_x"] * u + p["v_on_x"] * v + sd_x * ex
    y = p["effect"] * x + p["u_on_y"] * u + p["v_on_y"] * v + ey
    return Frame(
        data={"x": x, "y": y, "v": v},
        kinds={"x": CONTINUOUS, "y": CONTINUOUS, "v": CONTINUOUS},
        cluster_id=np.repeat(np.arange(pairs, dtype=np.int64), 2),
    )


def _truth_twin_pairs(p, estimand, **kw):
    if estimand == "TCE":
        return p["effect"]
    raise ConfigError(f"no closed-form truth for {estimand!r} in twin_pairs")


# --------------------------------------------------------------------------
# mr_summary


def _gen_mr_summary(n: int, seed: int, p) -> Frame:
    if n < 3:
        raise ConfigError("mr_summary needs at least 3 variants")
    beta_exp = _rng(seed, 0).uniform(p["beta_lo"], p["beta_hi"], n)
    se_exp = _rng(seed, 1).uniform(p["se_exp_lo"], p["se_exp_hi"], n)
    se_out = _rng(seed, 2).uniform(p["se_out_lo"], p["se_out_hi"], n)
    noise = _rng(seed, 3).standard_normal(n)
    # Exposure associations are noise-free (NOME); outcome noise matches
    # the reported standard errors exactly.
    beta_out = p["pleiotropy"] + p["slope"] * beta_exp + se_out * noise
    return Frame(
        data={
            "beta_exposure": beta_exp,
            "se_exposure": se_exp,
            "beta_outcome": beta_out,
            "se_outcome": se_out,
        },
        kinds={k: CONTINUOUS for k in ("beta_exposure", "se_exposure", "beta_outcome", "se_outcome")},
    )


def _truth_mr_summary(p, estimand, **kw):
    table = {"slope": p["slope"], "intercept": p["pleiotropy"]}
    if estimand not in table:
        raise ConfigError(f"no closed-form truth for {estimand!r} in mr_summary")
    return table[estimand]


# --------------------------------------------------------------------------


def generate(spec: DgpSpec, n: int, seed: int) -> Frame:
    """Draw n rows from the generator. Deterministic in (spec, n, seed)."""
    if n < 1:
        raise ConfigError("n must be positive")
    p = spec.params
    if spec.kind == "linear_chain":
        return _gen_linear_chain(n, seed)
    if spec.kind == "three_node":
        return _gen_three_node(n, seed, p)
    if spec.kind == "parallel_mediators":
        return _gen_parallel_mediators(n, seed, p)
    if spec.kind == "lifecourse":
        return _gen_lifecourse(n, seed, p)
    if spec.kind == "growth_cohort":
        return _gen_growth_cohort(n, seed, p)
    if spec.kind == "twin_pairs":
        return _gen_twin_pairs(n, seed, p)
    return _gen_mr_summary(n, seed, p)


_TRUTH = {
    "linear_chain": _truth_linear_chain,
    "three_node": _truth_three_node,
    "parallel_mediators": _truth_parallel_mediators,
    "lifecourse": _truth_lifecourse,
    "growth_cohort": _truth_growth_cohort,
    "twin_pairs": _truth_twin_pairs,
    "mr_summary": _truth_mr_summary,
}


def truth(spec: DgpSpec, estimand: str, **kw) -> float:
    """True value of an estimand under the generator.

    Linear kinds use closed-form path expansion; ``growth_cohort``
    evaluates counterfactuals by Monte Carlo (pass ``n`` and ``seed`` to
    control precision; see `_truth_growth_cohort`). Extra keyword
    arguments parameterize the estimand, e.g. ``a2=`` for ``CDE_1`` or
    ``blocks=`` for block-specific effects.
    """
    return float(_TRUTH[spec.kind](spec.params, estimand, **kw))
