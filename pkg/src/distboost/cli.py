"""Command-line interface.

Subcommands: ``fit``, ``predict``, ``cv``, ``stabsel``, ``reproduce`` and
``rerun``.  Every command writes its outputs plus a ``manifest.json`` into
``--out``; ``rerun`` replays a manifest and produces byte-identical CSVs.

Output schemas (comma separated, header row, UTF-8):

* ``trace.csv``        iteration,risk
* ``path.csv``         update,iteration,param,covariate,intercept,slope,risk
* ``cv.csv``           point,<mstop columns>,mean_risk
* ``frequencies.csv``  param,covariate,frequency,stable
* ``predictions.csv``  one column per distribution parameter
* ``<experiment>.csv`` long-format tables from :func:`distboost.simgen.run_experiment`
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import secrets
import sys
import time
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__, engine
from .baselearner import Dataset, LearnerKind, linear_learners
from .dist import get_family
from .engine import BoostConfig, BoostingError, FitState
from .simgen import EXPERIMENTS, ExperimentSettings, run_experiment
from .stabsel import candidate_pairs, pfer_bound, resolve_triple, run_stabsel
from .tune import ResamplingPlan, cv_risk, make_grid

MODEL_FORMAT = "distboost-model"
MODEL_VERSION = 1


class CLIError(Exception):
    pass


# ---------------------------------------------------------------------------
# I/O helpers
# ---------------------------------------------------------------------------

def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_csv(df: pd.DataFrame, path: Path) -> None:
    df.to_csv(path, index=False, lineterminator="\n", encoding="utf-8")
    back = pd.read_csv(path, encoding="utf-8")
    if list(back.columns) != [str(c) for c in df.columns] or len(back) != len(df):
        raise CLIError(f"schema check failed for {path}")


def load_dataset(path, response: str, covariates: str | None = None) -> Dataset:
    try:
        frame = pd.read_csv(path, encoding="utf-8")
    except (OSError, pd.errors.ParserError, UnicodeDecodeError) as exc:
        raise CLIError(f"cannot read {path}: {exc}") from exc
    if response not in frame.columns:
        raise CLIError(f"response column {response!r} not found in {path}")
    cols = covariates.split(",") if covariates else [c for c in frame.columns if c != response]
    missing = [c for c in cols if c not in frame.columns]
    if missing:
        raise CLIError(f"unknown column(s): {', '.join(missing)}")
    try:
        X = frame[cols].to_numpy(dtype=float)
        y = frame[response].to_numpy(dtype=float)
    except ValueError as exc:
        raise CLIError(f"non-numeric data in {path}: {exc}") from exc
    return Dataset(X, y, cols)


def _parse_ints(text: str) -> list[int]:
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise CLIError(f"expected integer or comma list, got {text!r}") from None


def _n_jobs(args) -> int:
    threads = args.threads if args.threads is not None else os.environ.get("DISTBOOST_THREADS", 1)
    try:
        return max(1, int(threads))
    except ValueError:
        raise CLIError(f"invalid thread count {threads!r}") from None


def _boost_config(args, p: int) -> BoostConfig:
    family = get_family(args.family)
    mstop = _parse_ints(args.mstop) if getattr(args, "mstop", None) is not None else [1]
    if len(mstop) == 1:
        mstop = mstop[0]
    elif args.method != "cyclical":
        raise CLIError("noncyclical methods take a scalar --mstop")
    kind = LearnerKind(args.learner)
    learners = [linear_learners(p, kind, args.penalty) for _ in range(family.n_params)]
    return BoostConfig(family, args.method, mstop, args.nu, learners)


# ---------------------------------------------------------------------------
# model serialization
# ---------------------------------------------------------------------------

def model_to_dict(state: FitState) -> dict:
    fam = state.family
    coefs: dict[str, dict[str, dict[str, float]]] = {p: {} for p in fam.param_names}
    for (k, j), (a, b) in sorted(state.coefficients.items()):
        coefs[fam.param_names[k]][state.column_names[j]] = {"intercept": a, "slope": b}
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "family": fam.name.value,
        "links": [link.value for link in fam.links],
        "param_names": list(fam.param_names),
        "method": state.method.value,
        "step_length": state.step_length,
        "offsets": dict(zip(fam.param_names, state.offsets)),
        "columns": list(state.column_names),
        "coefficients": coefs,
        "iterations": state.iterations,
        "update_counts": dict(zip(fam.param_names, state.update_counts())),
        "risk": engine.risk(state),
    }


def predict_from_model(model: dict, frame: pd.DataFrame) -> pd.DataFrame:
    """Parameter estimates for ``frame``; coefficients are matched by column name."""
    if model.get("format") != MODEL_FORMAT:
        raise CLIError("not a distboost model file")
    if model.get("version") != MODEL_VERSION:
        raise CLIError(f"unsupported model version {model.get('version')}")
    fam = get_family(model["family"])
    n = len(frame)
    out = {}
    for k, pname in enumerate(fam.param_names):
        eta = np.full(n, float(model["offsets"][pname]))
        for col, c in model["coefficients"][pname].items():
            if col not in frame.columns:
                raise CLIError(f"column {col!r} required by the model is missing")
            eta += c["intercept"] + c["slope"] * frame[col].to_numpy(dtype=float)
        out[pname] = fam.links[k].inverse(eta)
    return pd.DataFrame(out)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_fit(args, out: Path) -> dict:
    data = load_dataset(args.data, args.response, args.covariates)
    config = _boost_config(args, data.p)
    state = engine.fit(config, data)
    (out / "model.json").write_text(json.dumps(model_to_dict(state), indent=2) + "\n", encoding="utf-8")
    _write_csv(pd.DataFrame({"iteration": range(len(state.risk_trace)), "risk": state.risk_trace}),
               out / "trace.csv")
    names = state.family.param_names
    _write_csv(pd.DataFrame(
        [(t, u.iteration, names[u.param], state.column_names[u.covariate], u.intercept, u.slope, u.risk)
         for t, u in enumerate(state.path, start=1)],
        columns=["update", "iteration", "param", "covariate", "intercept", "slope", "risk"],
    ), out / "path.csv")
    return {"risk": engine.risk(state), "iterations": state.iterations}


def cmd_predict(args, out: Path) -> dict:
    model = json.loads(Path(args.model).read_text(encoding="utf-8"))
    frame = pd.read_csv(args.data, encoding="utf-8")
    pred = predict_from_model(model, frame)
    _write_csv(pred, out / "predictions.csv")
    return {"rows": len(pred)}


def cmd_cv(args, out: Path) -> dict:
    data = load_dataset(args.data, args.response, args.covariates)
    config = _boost_config(args, data.p)
    k = config.family.n_params
    if config.method.noncyclical:
        grid = make_grid(args.grid_max, args.grid_length, 1)
    else:
        grid = make_grid(args.grid_max, args.grid_length, k)
    plan = ResamplingPlan(args.plan, args.folds, args.seed)
    res = cv_risk(config, data, plan, grid, n_jobs=_n_jobs(args))
    if grid.is_scalar:
        table = pd.DataFrame({"point": range(grid.length), "mstop": grid.points})
    else:
        table = pd.DataFrame(list(grid.points), columns=[f"mstop_{p}" for p in config.family.param_names])
        table.insert(0, "point", range(grid.length))
    table["mean_risk"] = res.mean_risk
    _write_csv(table, out / "cv.csv")
    best = res.best
    best = list(best) if isinstance(best, tuple) else best
    summary = {
        "best_mstop": best,
        "path_fits": res.path_fits,
        "evaluations": res.evaluations,
        "dropped_folds": res.dropped_folds,
    }
    print(f"chosen mstop: {best}")
    return summary


def cmd_stabsel(args, out: Path) -> dict:
    data = load_dataset(args.data, args.response, args.covariates)
    config = _boost_config(args, data.p)
    eff_p = len(candidate_pairs(config, data.p))
    ss = resolve_triple(eff_p, q=args.q, pi_thr=args.pi_thr, pfer=args.pfer,
                        B=args.B, mstop_cap=args.mstop_cap, seed=args.seed)
    res = run_stabsel(ss, config, data, n_jobs=_n_jobs(args))
    names = config.family.param_names
    stable = res.stable_set()
    _write_csv(pd.DataFrame(
        [(names[k], data.column_names[j], f, (k, j) in stable) for (k, j), f in res.ranked()],
        columns=["param", "covariate", "frequency", "stable"],
    ), out / "frequencies.csv")
    report = {
        "q": ss.q,
        "pi_thr": ss.pi_thr,
        "pfer": ss.pfer,
        "pfer_bound": pfer_bound(ss.q, ss.pi_thr, eff_p),
        "given": sorted(ss.given),
        "effective_p": eff_p,
        "B": ss.B,
        "capped_subsamples": res.capped,
        "stable_set": [[names[k], data.column_names[j]] for k, j in sorted(stable)],
    }
    (out / "report.json").write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    print(f"effective_p={eff_p} q={ss.q} pi_thr={ss.pi_thr:.4f} PFER bound={report['pfer_bound']:.4f}")
    for pname, cname in report["stable_set"]:
        print(f"  stable: {pname} ~ {cname}")
    return {"stable": len(stable)}


def cmd_reproduce(args, out: Path) -> dict:
    overrides = {
        key: getattr(args, key)
        for key in ("scenario", "reps", "n", "p_noise", "total_iterations", "step_length",
                    "grid_max", "grid_length", "folds", "plan", "B", "mstop_cap")
        if getattr(args, key) is not None
    }
    if args.methods:
        overrides["methods"] = tuple(args.methods.split(","))
    if args.q_values:
        overrides["q_values"] = tuple(_parse_ints(args.q_values))
    if args.p_values:
        overrides["p_values"] = tuple(_parse_ints(args.p_values))
    if args.experiment == "stabsweep":
        overrides.setdefault("scenario", "1A")
        overrides.setdefault("methods", ("cyclical", "inner"))
    settings = ExperimentSettings(seed=args.seed, **overrides)
    table = run_experiment(args.experiment, settings, n_jobs=_n_jobs(args))
    _write_csv(table, out / f"{args.experiment}.csv")
    return {"rows": len(table)}


COMMANDS = {
    "fit": cmd_fit,
    "predict": cmd_predict,
    "cv": cmd_cv,
    "stabsel": cmd_stabsel,
    "reproduce": cmd_reproduce,
}

# arguments that never influence results and are excluded from replay
_VOLATILE = {"out", "threads", "command", "manifest"}


def _add_common(p, seed=True):
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--threads", type=int, default=None, help="worker processes (env DISTBOOST_THREADS)")
    if seed:
        p.add_argument("--seed", type=int, default=None, help="random seed; generated when omitted")


def _add_model(p):
    p.add_argument("--data", required=True, help="CSV with header row")
    p.add_argument("--response", required=True)
    p.add_argument("--covariates", default=None, help="comma list; default all other columns")
    p.add_argument("--family", choices=["normal", "negbin", "zinb"], default="normal")
    p.add_argument("--method", choices=["cyclical", "inner", "outer"], default="inner")
    p.add_argument("--nu", type=float, default=0.1, help="step length")
    p.add_argument("--learner", choices=["linear", "ridge"], default="linear")
    p.add_argument("--penalty", type=float, default=0.0, help="ridge penalty on the slope")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="distboost", description="Component-wise boosting for distributional regression.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a boosted GAMLSS model")
    _add_model(p)
    p.add_argument("--mstop", default="100", help="scalar, or comma list per parameter for cyclical")
    _add_common(p)

    p = sub.add_parser("predict", help="parameter estimates from a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    _add_common(p, seed=False)

    p = sub.add_parser("cv", help="out-of-bag tuning of mstop")
    _add_model(p)
    p.add_argument("--folds", type=int, default=25)
    p.add_argument("--plan", choices=["subsample", "bootstrap"], default="subsample")
    p.add_argument("--grid-max", type=int, default=300)
    p.add_argument("--grid-length", type=int, default=10)
    _add_common(p)

    p = sub.add_parser("stabsel", help="stability selection")
    _add_model(p)
    p.add_argument("--q", type=int, default=None)
    p.add_argument("--pi-thr", type=float, default=None)
    p.add_argument("--pfer", type=float, default=None)
    p.add_argument("--B", type=int, default=50)
    p.add_argument("--mstop-cap", type=int, default=1000)
    _add_common(p)

    p = sub.add_parser("reproduce", help="run a simulation experiment")
    p.add_argument("--experiment", choices=EXPERIMENTS, required=True)
    p.add_argument("--scenario", default=None)
    p.add_argument("--methods", default=None, help="comma list of cyclical,inner,outer")
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--p-noise", type=int, default=None)
    p.add_argument("--total-iterations", type=int, default=None)
    p.add_argument("--step-length", type=float, default=None)
    p.add_argument("--grid-max", type=int, default=None)
    p.add_argument("--grid-length", type=int, default=None)
    p.add_argument("--folds", type=int, default=None)
    p.add_argument("--plan", choices=["subsample", "bootstrap"], default=None)
    p.add_argument("--q-values", default=None)
    p.add_argument("--p-values", default=None)
    p.add_argument("--B", type=int, default=None)
    p.add_argument("--mstop-cap", type=int, default=None)
    _add_common(p)

    p = sub.add_parser("rerun", help="replay a manifest into a new directory")
    p.add_argument("manifest")
    p.add_argument("--out", required=True)
    p.add_argument("--threads", type=int, default=None)
    return parser


def _execute(command: str, args: argparse.Namespace) -> dict:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if hasattr(args, "seed") and args.seed is None:
        args.seed = secrets.randbits(31)
    start = time.perf_counter()
    summary = COMMANDS[command](args, out)
    config = {k: v for k, v in sorted(vars(args).items()) if k not in _VOLATILE}
    data_path = getattr(args, "data", None)
    manifest = {
        "command": command,
        "config": config,
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "duration_seconds": round(time.perf_counter() - start, 3),
        "input_digest": _sha256(data_path) if data_path else None,
        "summary": summary,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, default=str) + "\n", encoding="utf-8")
    return manifest


def _rerun(args) -> dict:
    manifest = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
    command = manifest["command"]
    ns = argparse.Namespace(**manifest["config"], out=args.out, threads=args.threads)
    data_path = getattr(ns, "data", None)
    if data_path and manifest.get("input_digest") and _sha256(data_path) != manifest["input_digest"]:
        raise CLIError(f"input {data_path} changed since the manifest was written")
    return _execute(command, ns)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "rerun":
            _rerun(args)
        else:
            _execute(args.command, args)
    except (CLIError, BoostingError, ValueError, KeyError, OSError, NotImplementedError) as exc:
        print(f"distboost {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
