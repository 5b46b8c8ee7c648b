"""Command-line entry point: gen-data, train, eval, search, sweep.

Every command takes an output directory, writes its artifacts there with fixed
names, and echoes the effective configuration (file values merged with flag
overrides) to ``config.json`` so runs are reproducible from the outputs alone.

Exit codes: 0 success, 2 missing/invalid input, 3 numerical failure,
4 degenerate data.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import jsonio, metrics
from .encoder import encode_posterior
from .graphs import OpType
from .model import Model
from .oracle import Dataset, OracleConfig, build_dataset
from .search import SearchConfig, search
from .trainer import NumericalDivergenceError, TrainConfig, train

EXIT_OK = 0
EXIT_MISSING_INPUT = 2
EXIT_NUMERICAL = 3
EXIT_DEGENERATE = 4


class InputError(Exception):
    """Bad or missing operator input (exit 2)."""


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING_INPUT
    except NumericalDivergenceError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except metrics.DegenerateDataError as exc:
        print(f"degenerate data: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="archspace",
        description="train, evaluate and search a latent space of architectures",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a labeled dataset")
    p.add_argument("--n", type=int, required=True, help="number of unique architectures")
    p.add_argument("--internal-nodes", type=int, default=6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--split-fraction", type=float, default=0.9)
    p.add_argument("--config", type=Path, help="JSON config (oracle overrides)")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.set_defaults(handler=cmd_gen_data)

    p = sub.add_parser("train", help="train a model on a dataset")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--config", type=Path, help="JSON config with TrainConfig fields")
    p.add_argument("--out", type=Path, required=True)
    for name, kind in _TRAIN_FLAGS.items():
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, type=kind, default=None)
    p.add_argument("--serial", action="store_true", default=None,
                   help="byte-stable outputs (suppresses wall-clock telemetry)")
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint against a dataset")
    p.add_argument("--checkpoint", type=Path, required=True)
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--config", type=Path)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--n-latent", dest="n_latent", type=int, default=None)
    p.add_argument("--n-decode", dest="n_decode", type=int, default=None)
    p.add_argument("--prior-points", dest="prior_points", type=int, default=None)
    p.add_argument("--prior-decodes", dest="prior_decodes", type=int, default=None)
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("search", help="gradient-ascent architecture discovery")
    p.add_argument("--checkpoint", type=Path, required=True)
    p.add_argument("--config", type=Path)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--score-with-oracle", action="store_true")
    p.add_argument("--no-trajectories", action="store_true",
                   help="skip writing trajectories.csv")
    for name, kind in _SEARCH_FLAGS.items():
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, type=kind, default=None)
    p.set_defaults(handler=cmd_search)

    p = sub.add_parser("sweep", help="2-D principal-component sweep of f_perf")
    p.add_argument("--checkpoint", type=Path, required=True)
    p.add_argument("--data", type=Path, required=True,
                   help="dataset supplying latent codes for the components")
    p.add_argument("--config", type=Path)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--half-width", dest="half_width", type=float, default=None)
    p.add_argument("--resolution", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(handler=cmd_sweep)

    return parser


_TRAIN_FLAGS = {
    "learning_rate": float, "batch_size": int, "epochs": int, "kl_weight": float,
    "optimizer": str, "clip_norm": float, "seed": int, "hidden_size": int,
    "latent_size": int, "predictor_hidden": int, "max_nodes": int, "eval_every": int,
    "eval_latent_samples": int, "eval_decodes": int,
}

_SEARCH_FLAGS = {
    "step_size": float, "iterations": int, "restarts": int, "decode": str,
    "n_decode": int, "comp_weight": float, "seed": int,
}


# ---------------------------------------------------------------------------
# config plumbing
# ---------------------------------------------------------------------------


def _load_config_file(path: Path | None) -> dict:
    if path is None:
        return {}
    if not path.exists():
        raise InputError(f"config file not found: {path}")
    try:
        obj = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"config file {path} is not valid JSON: {exc}")
    if not isinstance(obj, dict):
        raise InputError(f"config file {path} must hold a JSON object")
    return obj


def _merge(defaults: dict, file_values: dict, args, flags) -> dict:
    merged = dict(defaults)
    for key, value in file_values.items():
        if key in merged:
            merged[key] = value
    for key in flags:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    return merged


def _prepare_out(args) -> Path:
    out = args.out
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise InputError(f"cannot create output directory {out}: {exc}")
    return out

def _echo_config(out: Path, command: str, effective: dict) -> None:
    jsonio.write_json(out / "config.json", {"command": command, **effective})


def _require_file(path: Path, what: str) -> Path:
    if not path.exists():
        raise InputError(f"{what} not found: {path}")
    return path


def _oracle_from_config(obj: dict) -> OracleConfig:
    section = obj.get("oracle", {})
    if not section:
        return OracleConfig()
    kwargs = {}
    for key in ("quality_coeff", "edge_coeff", "cost_coeff", "z_norm"):
        if key in section:
            kwargs[key] = float(section[key])
    for table in ("cost", "quality"):
        if table in section:
            base = dict(OracleConfig().cost if table == "cost" else OracleConfig().quality)
            for name, value in section[table].items():
                base[OpType[name.upper()]] = float(value)
            kwargs[table] = base
    return OracleConfig(**kwargs)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_gen_data(args) -> int:
    if args.n < 10:
        raise InputError("--n must be at least 10")
    file_values = _load_config_file(args.config)
    out = _prepare_out(args)
    oracle_config = _oracle_from_config(file_values)
    dataset = build_dataset(args.n, n_internal=args.internal_nodes, seed=args.seed,
                            split_fraction=args.split_fraction, config=oracle_config)
    dataset.save(out / "dataset.jsonl")
    _echo_config(out, "gen-data", {
        "n": args.n, "internal_nodes": args.internal_nodes, "seed": args.seed,
        "split_fraction": args.split_fraction,
        "oracle": {k: (v if not isinstance(v, dict) else
                       {OpType(t).name: c for t, c in v.items()})
                   for k, v in dataclasses.asdict(oracle_config).items()},
    })
    print(f"wrote {args.n} architectures to {out / 'dataset.jsonl'}")
    return EXIT_OK


def cmd_train(args) -> int:
    data_path = _require_file(args.data, "dataset")
    file_values = _load_config_file(args.config)
    defaults = dataclasses.asdict(TrainConfig())
    flags = dict(_TRAIN_FLAGS, serial=bool)
    effective = _merge(defaults, file_values, args, flags)
    try:
        config = TrainConfig(**effective)
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad training configuration: {exc}")
    out = _prepare_out(args)
    _echo_config(out, "train", effective)

    dataset = Dataset.load(data_path)
    model, log = train(dataset, config)
    model.save(out / "checkpoint.json", epoch=config.epochs,
               dataset_fingerprint=jsonio.sha256_file(data_path))
    (out / "trainlog.csv").write_text(log.to_csv())
    (out / "evals.csv").write_text(log.evals_to_csv())
    print(f"trained {config.epochs} epochs; checkpoint at {out / 'checkpoint.json'}")
    return EXIT_OK


def cmd_eval(args) -> int:
    checkpoint_path = _require_file(args.checkpoint, "checkpoint")
    data_path = _require_file(args.data, "dataset")
    file_values = _load_config_file(args.config)
    defaults = {"seed": 0, "n_latent": 5, "n_decode": 5,
                "prior_points": 1000, "prior_decodes": 10}
    flags = {k: int for k in defaults}
    effective = _merge(defaults, file_values, args, flags)
    out = _prepare_out(args)
    _echo_config(out, "eval", effective)

    model, meta = Model.load(checkpoint_path)
    fingerprint = jsonio.sha256_file(data_path)
    if meta["dataset_fingerprint"] and meta["dataset_fingerprint"] != fingerprint:
        print("warning: dataset fingerprint differs from the one used in training",
              file=sys.stderr)
    dataset = Dataset.load(data_path)
    report = metrics.evaluate(model, dataset, **effective)
    (out / "eval_report.json").write_text(report.to_json() + "\n")
    print(f"eval report at {out / 'eval_report.json'}")
    return EXIT_OK


def cmd_search(args) -> int:
    checkpoint_path = _require_file(args.checkpoint, "checkpoint")
    file_values = _load_config_file(args.config)
    defaults = dataclasses.asdict(SearchConfig())
    effective = _merge(defaults, file_values, args, _SEARCH_FLAGS)
    try:
        config = SearchConfig(**effective)
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad search configuration: {exc}")
    out = _prepare_out(args)
    _echo_config(out, "search", {**effective,
                                 "score_with_oracle": args.score_with_oracle})

    model, _ = Model.load(checkpoint_path)
    oracle_config = _oracle_from_config(file_values) if args.score_with_oracle else None
    result = search(model, config, oracle_config=oracle_config)
    (out / "search_result.json").write_text(result.to_json() + "\n")
    if not args.no_trajectories:
        (out / "trajectories.csv").write_text(result.trajectories_csv())
    best = result.best()
    print(f"{len(result.entries)} architectures; best predicted objective "
          f"{best.pred_objective:.4f}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    checkpoint_path = _require_file(args.checkpoint, "checkpoint")
    data_path = _require_file(args.data, "dataset")
    file_values = _load_config_file(args.config)
    defaults = {"half_width": 3.0, "resolution": 41, "seed": 0}
    flags = {"half_width": float, "resolution": int, "seed": int}
    effective = _merge(defaults, file_values, args, flags)
    out = _prepare_out(args)
    _echo_config(out, "sweep", effective)

    model, _ = Model.load(checkpoint_path)
    dataset = Dataset.load(data_path)
    codes = [encode_posterior(a, model).mean
             for a, _, _ in dataset.train + dataset.test]
    rows = metrics.pca_sweep(model, np.stack(codes),
                             half_width=effective["half_width"],
                             resolution=effective["resolution"],
                             seed=effective["seed"])
    (out / "sweep.csv").write_text(metrics.sweep_to_csv(rows))
    print(f"{rows.shape[0]} grid points at {out / 'sweep.csv'}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
