"""Batch command-line interface.

One analysis per invocation: load data, apply optional transforms, run
the requested analysis (effect estimation, two-period classification,
twin estimators, instrumental variables, or graph queries), and emit a
JSON result document:

    {"meta": {...seed, config digest...},
     "estimates": {name: {"point": ..., "se": ..., "ci95": [lo, hi]}},
     "diagnostics": {...}}

Exit codes: 0 success, 2 configuration or data error, 3 estimation
failure, 4 bootstrap abort. All randomness flows from --seed; effect
estimation refuses to run without it. Repeating a run with the same
config and seed reproduces the result document byte for byte except for
the meta.created_utc timestamp.
"""

from __future__ import annotations

import argparse
import datetime
import hashlib
import json
import sys

import numpy as np
import pandas as pd

from . import __version__
from .bootstrap import BootstrapPlan, bootstrap
from .dag import backdoor_adjustment_sets, d_separated, parse_dag
from .effects import EstimandRequest, bootstrap_estimate, estimate
from .errors import (
    BootstrapAbort,
    ConfigError,
    ConvergenceError,
    DataError,
    EstimationError,
    RankDeficiencyError,
    SeparationError,
    SpecificationError,
)
from .frame import BINARY, CONTINUOUS, Frame, log_transform, standardize, write_frame
from .iv import MrSummary, mr_egger, tsls, wald_ratio
from .lifecourse import compare_nested
from .measurement import Reliability, disattenuate, extract_growth
from .simulate import KINDS as DGP_KINDS
from .simulate import DgpSpec, generate
from .twin import (
    MODE_BOTH_TWINS,
    MODE_NONE,
    MODE_TARGET_ONLY,
    TwinFrame,
    between_within,
    naive_clustered,
)

_ANALYSIS_KEYS = ("estimand", "lifecourse", "twin", "iv", "dag")


def _jsonable(x):
    """Recursively convert to plain JSON-serializable values."""
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    return x


def _check_keys(cfg, allowed, required, where):
    if not isinstance(cfg, dict):
        raise ConfigError(f"{where} must be an object")
    unknown = set(cfg) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")
    missing = set(required) - set(cfg)
    if missing:
        raise ConfigError(f"{where} is missing keys: {sorted(missing)}")


def _meta(effective_config: dict, seed: int | None) -> dict:
    canonical = json.dumps(
        _jsonable(effective_config), sort_keys=True, separators=(",", ":")
    )
    return {
        "tool": "causalcourse",
        "version": __version__,
        "result_schema": "v1",
        "seed": seed,
        "config_digest": hashlib.sha256(canonical.encode("utf-8")).hexdigest(),
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(
            timespec="seconds"
        ),
    }


def _infer_schema(df: pd.DataFrame, exclude: str | None) -> dict[str, str]:
    schema = {}
    for col in df.columns:
        if col == exclude:
            continue
        values = pd.to_numeric(df[col], errors="coerce")
        if values.isna().all() and not df[col].isna().all():
            continue  # non-numeric column (e.g. labels): not part of the frame
        finite = values.dropna()
        schema[col] = BINARY if finite.isin((0.0, 1.0)).all() else CONTINUOUS
    if not schema:
        raise DataError("no numeric columns found in the data file")
    return schema


def _load_data(cfg) -> Frame:
    _check_keys(cfg, ("path", "schema", "cluster_col"), ("path",), "data")
    try:
        df = pd.read_csv(cfg["path"])
    except (OSError, pd.errors.ParserError, UnicodeDecodeError) as exc:
        raise DataError(f"could not read {cfg['path']}: {exc}") from exc
    cluster_col = cfg.get("cluster_col")
    schema = cfg.get("schema") or _infer_schema(df, exclude=cluster_col)
    return Frame.from_pandas(df, schema, cluster_col=cluster_col)


def _apply_transforms(frame: Frame, transforms) -> tuple[Frame, list]:
    applied = []
    for entry in transforms:
        _check_keys(entry, ("standardize", "log", "growth"), (), "transform")
        if len(entry) != 1:
            raise ConfigError("each transform entry must have exactly one key")
        if "standardize" in entry:
            frame, report = standardize(frame, tuple(entry["standardize"]))
            applied.append({"standardize": report.as_dict()})
        elif "log" in entry:
            frame = log_transform(frame, tuple(entry["log"]))
            applied.append({"log": list(entry["log"])})
        else:
            g = entry["growth"]
            _check_keys(
                g,
                ("measure_cols", "ages", "centering_age", "size_col", "velocity_col"),
                ("measure_cols", "ages", "centering_age"),
                "growth transform",
            )
            frame, features = extract_growth(
                frame,
                measure_cols=tuple(g["measure_cols"]),
                ages=tuple(g["ages"]),
                centering_age=float(g["centering_age"]),
                size_col=g.get("size_col", "size"),
                velocity_col=g.get("velocity_col", "velocity"),
            )
            applied.append({"growth": features.as_dict()})
    return frame, applied


def _plan(cfg, seed: int | None, default_mode: str) -> BootstrapPlan:
    _check_keys(cfg, ("replicates", "mode", "ci"), (), "bootstrap")
    if seed is None:
        raise ConfigError("bootstrap requires --seed")
    return BootstrapPlan(
        replicates=int(cfg.get("replicates", 1000)),
        mode=cfg.get("mode", default_mode),
        seed=seed,
        ci=cfg.get("ci", "percentile"),
    )


def _attach_bootstrap(est, plan: BootstrapPlan, frame: Frame, compute) -> None:
    result = bootstrap(plan, frame, lambda fr, s: compute(fr).components)
    est.se.update(result.se)
    est.ci95.update(result.ci95)
    est.diagnostics["bootstrap"] = {
        "replicates": plan.replicates,
        "mode": plan.mode,
        "ci": plan.ci,
        "n_used": result.n_used,
        "n_failed": result.n_failed,
    }


def _run_estimand(frame, block, seed, boot_cfg):
    if seed is None:
        raise ConfigError("effect estimation requires --seed")
    req = EstimandRequest.from_config(block)
    if boot_cfg is not None:
        est = bootstrap_estimate(req, frame, _plan(boot_cfg, seed, "iid"))
    else:
        est = estimate(req, frame, seed=seed)
    return est.as_dict(), est.diagnostics


def _run_lifecourse(frame, block, seed, boot_cfg):
    if boot_cfg is not None:
        raise ConfigError("the two-period comparison reports F tests, not bootstrap intervals")
    _check_keys(
        block, ("a1", "a2", "outcome", "confounders", "alpha"),
        ("a1", "a2", "outcome"), "lifecourse analysis",
    )
    verdict = compare_nested(
        frame,
        block["a1"],
        block["a2"],
        block["outcome"],
        confounders=tuple(block.get("confounders", ())),
        alpha=float(block.get("alpha", 0.05)),
    )
    doc = verdict.as_dict()
    estimates = {label: {"point": value} for label, value in doc.pop("coefficients").items()}
    return estimates, doc


def _run_twin(frame, block, seed, boot_cfg):
    _check_keys(
        block, ("mode", "exposure", "outcome", "covariates", "nonshared", "zygosity"),
        ("mode", "exposure", "outcome"), "twin analysis",
    )
    mode = block["mode"]
    if mode not in ("naive", "bw", "bw-cotwin"):
        raise ConfigError("twin mode must be one of: naive, bw, bw-cotwin")
    nonshared = block.get("nonshared")
    covariates = tuple(block.get("covariates", ()))

    def compute(fr: Frame):
        t = TwinFrame(
            fr, block["exposure"], block["outcome"],
            nonshared=nonshared, zygosity=block.get("zygosity"),
        )
        if mode == "naive":
            return naive_clustered(t, covariates)
        if mode == "bw":
            return between_within(t, MODE_TARGET_ONLY if nonshared else MODE_NONE)
        return between_within(t, MODE_BOTH_TWINS)

    est = compute(frame)
    if boot_cfg is not None:
        plan = _plan(boot_cfg, seed, "cluster")
        if plan.mode != "cluster":
            raise ConfigError("twin bootstrap must resample whole pairs (mode=cluster)")
        _attach_bootstrap(est, plan, frame, compute)
    return est.as_dict(), est.diagnostics


def _run_iv(frame, block, seed, boot_cfg):
    _check_keys(
        block, ("method", "instruments", "exposure", "outcome", "covariates"),
        ("method",), "iv analysis",
    )
    method = block["method"]
    if method == "mr-egger":
        def compute(fr: Frame):
            return mr_egger(MrSummary.from_frame(fr))
    elif method in ("wald", "tsls"):
        for key in ("instruments", "exposure", "outcome"):
            if key not in block:
                raise ConfigError(f"iv method {method!r} needs {key!r}")
        instruments = tuple(block["instruments"])
        if method == "wald":
            if len(instruments) != 1:
                raise ConfigError("the ratio estimator takes exactly one instrument")
            if block.get("covariates"):
                raise ConfigError("the ratio estimator takes no covariates; use tsls")

            def compute(fr: Frame):
                return wald_ratio(fr, instruments[0], block["exposure"], block["outcome"])
        else:
            def compute(fr: Frame):
                return tsls(
                    fr, instruments, block["exposure"], block["outcome"],
                    tuple(block.get("covariates", ())),
                )
    else:
        raise ConfigError("iv method must be one of: wald, tsls, mr-egger")

    est = compute(frame)
    if boot_cfg is not None:
        _attach_bootstrap(est, _plan(boot_cfg, seed, "iid"), frame, compute)
    return est.as_dict(), est.diagnostics


def _run_dag(block):
    _check_keys(block, ("graph_file", "graph_text", "query"), ("query",), "dag analysis")
    if ("graph_file" in block) == ("graph_text" in block):
        raise ConfigError("dag analysis needs exactly one of graph_file or graph_text")
    if "graph_file" in block:
        try:
            with open(block["graph_file"], "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise DataError(f"could not read graph file: {exc}") from exc
    else:
        text = block["graph_text"]
    g = parse_dag(text)
    query = block["query"]
    _check_keys(
        query, ("type", "x", "y", "given", "exposure", "outcome"), ("type",), "dag query"
    )
    if query["type"] == "dsep":
        given = tuple(query.get("given", ()))
        sep = d_separated(g, query["x"], query["y"], given)
        return {}, {
            "query": {"type": "dsep", "x": query["x"], "y": query["y"], "given": list(given)},
            "d_separated": sep,
        }
    if query["type"] == "adjust":
        sets = backdoor_adjustment_sets(g, query["exposure"], query["outcome"])
        return {}, {
            "query": {
                "type": "adjust",
                "exposure": query["exposure"],
                "outcome": query["outcome"],
            },
            "adjustment_sets": [list(s) for s in sets],
            "none_needed": sets == [()],
            "impossible": sets == [],
        }
    raise ConfigError("dag query type must be 'dsep' or 'adjust'")


def _run_config(config: dict, seed: int | None) -> dict:
    _check_keys(
        config, ("data", "transforms", "analysis", "bootstrap", "output"),
        ("analysis",), "config",
    )
    analysis = config["analysis"]
    _check_keys(analysis, _ANALYSIS_KEYS, (), "analysis")
    present = [k for k in _ANALYSIS_KEYS if k in analysis]
    if len(present) != 1:
        raise ConfigError(f"config needs exactly one analysis block, got {present or 'none'}")
    kind = present[0]
    boot_cfg = config.get("bootstrap")

    diagnostics: dict = {}
    if kind == "dag":
        if boot_cfg is not None:
            raise ConfigError("graph queries take no bootstrap")
        estimates, analysis_diag = _run_dag(analysis["dag"])
    else:
        if "data" not in config:
            raise ConfigError("config needs a data block")
        frame = _load_data(config["data"])
        frame, applied = _apply_transforms(frame, config.get("transforms", ()))
        if applied:
            diagnostics["transforms"] = applied
        if frame.dropped_rows:
            diagnostics["dropped_rows"] = frame.dropped_rows
        runner = {
            "estimand": _run_estimand,
            "lifecourse": _run_lifecourse,
            "twin": _run_twin,
            "iv": _run_iv,
        }[kind]
        estimates, analysis_diag = runner(frame, analysis[kind], seed, boot_cfg)

    diagnostics.update(_jsonable(analysis_diag))
    return {
        "meta": _meta(config, seed),
        "estimates": _jsonable(estimates),
        "diagnostics": diagnostics,
    }


def _apply_reliability(result: dict, spec: str) -> None:
    parts = spec.split(",")
    if len(parts) not in (1, 2):
        raise ConfigError("--reliability expects r or r,se")
    try:
        r = float(parts[0])
        se_r = float(parts[1]) if len(parts) == 2 else None
    except ValueError as exc:
        raise ConfigError(f"--reliability expects numbers: {exc}") from exc
    rel = Reliability(r=r, se_r=se_r)
    uncorrected = {k: dict(v) for k, v in result["estimates"].items()}
    for name, entry in result["estimates"].items():
        corrected = disattenuate(entry["point"], rel, se=entry.get("se"))
        entry["point"] = corrected.point
        if corrected.se is not None:
            entry["se"] = corrected.se
        if "ci95" in entry:
            lo, hi = entry["ci95"]
            entry["ci95"] = [lo / r, hi / r]
    result["diagnostics"]["measurement_correction"] = {
        "r": r,
        "se_r": se_r,
        "note": (
            "components divided by the reliability; interval endpoints "
            "scaled by 1/r (reliability uncertainty enters the SEs only)"
        ),
        "uncorrected": uncorrected,
    }


def _emit(result: dict, out_path: str | None) -> None:
    text = json.dumps(result, sort_keys=True, indent=2) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _split_csv(value: str | None) -> tuple[str, ...]:
    if not value:
        return ()
    return tuple(p.strip() for p in value.split(",") if p.strip())


def _cmd_simulate(args) -> int:
    params = {}
    for kv in args.param or ():
        name, sep, value = kv.partition("=")
        if not sep:
            raise ConfigError(f"--param expects NAME=VALUE, got {kv!r}")
        try:
            params[name] = float(value)
        except ValueError as exc:
            raise ConfigError(f"--param {name}: {exc}") from exc
    frame = generate(DgpSpec(kind=args.kind, params=params), args.n, args.seed)
    write_frame(frame, args.out)
    sys.stdout.write(
        json.dumps(
            {"kind": args.kind, "n": frame.n_rows, "seed": args.seed, "out": args.out},
            sort_keys=True,
        )
        + "\n"
    )
    return 0


def _cmd_estimate(args) -> int:
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            config = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"could not read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(config, dict):
        raise ConfigError("config must be a JSON object")
    if args.boot is not None:
        config.setdefault("bootstrap", {})["replicates"] = args.boot
    if args.ci is not None:
        config.setdefault("bootstrap", {})["ci"] = args.ci
    if args.growth_from:
        if args.ages is None or args.center is None:
            raise ConfigError("--growth-from needs --ages and --center")
        config.setdefault("transforms", []).append(
            {
                "growth": {
                    "measure_cols": list(_split_csv(args.growth_from)),
                    "ages": [float(a) for a in _split_csv(args.ages)],
                    "centering_age": args.center,
                }
            }
        )
    result = _run_config(config, seed=args.seed)
    if args.reliability:
        _apply_reliability(result, args.reliability)
    _emit(result, args.out or config.get("output"))
    return 0


def _cmd_lifecourse(args) -> int:
    config = {
        "data": {"path": args.data, "cluster_col": args.cluster_col},
        "analysis": {
            "lifecourse": {
                "a1": args.a1,
                "a2": args.a2,
                "outcome": args.outcome,
                "confounders": list(_split_csv(args.confounders)),
                "alpha": args.alpha,
            }
        },
    }
    result = _run_config(config, seed=None)
    _emit(result, args.out)
    return 0


def _cmd_twin(args) -> int:
    config = {
        "data": {"path": args.data, "cluster_col": args.pair_col},
        "analysis": {
            "twin": {
                "mode": args.mode,
                "exposure": args.exposure,
                "outcome": args.outcome,
                "covariates": list(_split_csv(args.covariates)),
            }
        },
    }
    if args.nonshared:
        config["analysis"]["twin"]["nonshared"] = args.nonshared
    if args.boot is not None:
        config["bootstrap"] = {"replicates": args.boot, "mode": "cluster"}
        if args.ci is not None:
            config["bootstrap"]["ci"] = args.ci
    result = _run_config(config, seed=args.seed)
    _emit(result, args.out)
    return 0


def _cmd_iv(args) -> int:
    block: dict = {"method": args.method}
    if args.method != "mr-egger":
        block["instruments"] = list(_split_csv(args.instruments))
        block["exposure"] = args.exposure
        block["outcome"] = args.outcome
        block["covariates"] = list(_split_csv(args.covariates))
    config = {"data": {"path": args.data}, "analysis": {"iv": block}}
    if args.boot is not None:
        config["bootstrap"] = {"replicates": args.boot}
        if args.ci is not None:
            config["bootstrap"]["ci"] = args.ci
    result = _run_config(config, seed=args.seed)
    _emit(result, args.out)
    return 0


def _cmd_dag(args) -> int:
    if args.dsep:
        query = {"type": "dsep", "x": args.dsep[0], "y": args.dsep[1],
                 "given": list(_split_csv(args.given))}
    else:
        query = {"type": "adjust", "exposure": args.adjust[0], "outcome": args.adjust[1]}
    config = {"analysis": {"dag": {"graph_file": args.graph, "query": query}}}
    result = _run_config(config, seed=None)
    _emit(result, args.out)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="causalcourse",
        description="Counterfactual effect estimation for longitudinal exposure studies.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="draw synthetic data from a built-in generator")
    p.add_argument("--kind", required=True, choices=DGP_KINDS)
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--param", action="append", metavar="NAME=VALUE",
                   help="override a generator parameter (repeatable)")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("estimate", help="run an analysis config")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", required=True, type=int,
                   help="master seed; all randomness derives from it")
    p.add_argument("--out", help="result path (defaults to config output, then stdout)")
    p.add_argument("--boot", type=int, help="bootstrap replicates (overrides config)")
    p.add_argument("--ci", choices=("percentile", "normal"))
    p.add_argument("--reliability", metavar="R[,SE]",
                   help="divide estimated components by a reliability coefficient")
    p.add_argument("--growth-from", metavar="COLS", help="comma-separated measure columns")
    p.add_argument("--ages", metavar="AGES", help="comma-separated ages for --growth-from")
    p.add_argument("--center", type=float, help="centering age for --growth-from")
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("lifecourse", help="two-period model comparison")
    p.add_argument("--data", required=True)
    p.add_argument("--a1", required=True)
    p.add_argument("--a2", required=True)
    p.add_argument("--outcome", required=True)
    p.add_argument("--confounders", help="comma-separated columns")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--cluster-col")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_lifecourse)

    p = sub.add_parser("twin", help="paired-data estimators")
    p.add_argument("--data", required=True)
    p.add_argument("--mode", required=True, choices=("naive", "bw", "bw-cotwin"))
    p.add_argument("--exposure", required=True)
    p.add_argument("--outcome", required=True)
    p.add_argument("--pair-col", default="cluster_id")
    p.add_argument("--covariates", help="comma-separated columns (naive mode)")
    p.add_argument("--nonshared", help="non-shared covariate column (bw modes)")
    p.add_argument("--boot", type=int)
    p.add_argument("--ci", choices=("percentile", "normal"))
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_twin)

    p = sub.add_parser("iv", help="instrumental-variable estimators")
    p.add_argument("--data", required=True)
    p.add_argument("--method", required=True, choices=("wald", "tsls", "mr-egger"))
    p.add_argument("--instruments", help="comma-separated instrument columns")
    p.add_argument("--exposure")
    p.add_argument("--outcome")
    p.add_argument("--covariates", help="comma-separated columns (tsls)")
    p.add_argument("--boot", type=int)
    p.add_argument("--ci", choices=("percentile", "normal"))
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_iv)

    p = sub.add_parser("dag", help="graph queries")
    p.add_argument("--graph", required=True, help="graph description file")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--dsep", nargs=2, metavar=("X", "Y"))
    group.add_argument("--adjust", nargs=2, metavar=("EXPOSURE", "OUTCOME"))
    p.add_argument("--given", help="comma-separated conditioning set for --dsep")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_dag)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BootstrapAbort as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (RankDeficiencyError, SeparationError, ConvergenceError, EstimationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except np.linalg.LinAlgError as exc:
        print(f"error: linear algebra failure: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, DataError, SpecificationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
