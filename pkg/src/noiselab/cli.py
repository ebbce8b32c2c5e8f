"""Command-line entry point: ``noiselab <subcommand> ...``.

Failures exit nonzero with one JSON line on stderr:
``{"error": "<ExceptionType>", "message": "...", "phase": ...}``.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import data as data_mod
from .errors import ArgumentError, FormatError, NoiselabError
from .estimator import (EstimatorModel, build_training_rows, estimate_noise_rate, featurize_losses,
                        fit_estimator)
from .metrics import compute_metrics
from .model import ModelParams, predict_proba
from .noise import CorruptionRecord, NoiseSpec, inject_noise
from .pipeline import RunConfig, ablate_forget_rate, ablation_csv, per_sample_ce, run_pipeline

SEED_ENV = "NOISELAB_SEED"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _fail("UsageError", message, code=2)


def _fail(kind: str, message: str, phase=None, code: int = 1):
    sys.stderr.write(json.dumps({"error": kind, "message": message, "phase": phase}) + "\n")
    sys.exit(code)


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ArgumentError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _seed(args) -> int:
    return args.seed if args.seed is not None else _default_seed()


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ArgumentError(f"expected comma-separated numbers, got {text!r}") from None


def _write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _load_config(path, seed_flag) -> RunConfig:
    raw = json.loads(Path(path).read_text()) if path else {}
    if seed_flag is not None:
        raw["seed"] = seed_flag
    elif "seed" not in raw:
        raw["seed"] = _default_seed()
    return RunConfig.from_dict(raw)


def _load_estimator(path, cfg: RunConfig):
    path = path or cfg.estimator_path
    return EstimatorModel.load(path) if path else None


def read_loss_csv(path) -> np.ndarray:
    """Losses from a CSV: the ``loss`` column if there is a header, else the first column."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise FormatError("losses", f"{path}: no rows")
    col = 0
    if "loss" in rows[0]:
        col = rows[0].index("loss")
        rows = rows[1:]
    try:
        return np.array([float(r[col]) for r in rows], dtype=np.float64)
    except (ValueError, IndexError) as exc:
        raise FormatError("losses", f"{path}: {exc}") from None


def write_loss_csv(path, losses) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "loss"])
        for i, v in enumerate(losses):
            w.writerow([i, repr(float(v))])


# -- subcommands --------------------------------------------------------------

def cmd_make_synth(args):
    spec = data_mod.SyntheticSpec(args.n, args.c, args.dim, args.spread, _seed(args), args.name)
    d = data_mod.generate_synthetic(spec)
    if args.splits is None:
        data_mod.save_dataset(d, args.out)
        return
    parts = data_mod.split_dataset(d, _floats(args.splits), args.split_seed)
    stem = Path(args.out)
    for part in parts:
        data_mod.save_dataset(part, stem.with_name(f"{stem.stem}.{part.split}{stem.suffix or '.json'}"))


def cmd_inject_noise(args):
    d = data_mod.load_dataset(args.data)
    noisy, record = inject_noise(d, NoiseSpec(args.kind, args.rate, _seed(args)))
    data_mod.save_dataset(noisy, args.out)
    if args.record:
        record.save(args.record)


def cmd_train_estimator(args):
    cfg = _load_config(args.config, args.seed)
    aux = [data_mod.load_dataset(p) for p in args.aux]
    rows = build_training_rows(aux, _floats(args.rates), args.kinds.split(","), cfg)
    model = fit_estimator(rows, args.ridge)
    model.save(args.out)


def cmd_estimate(args):
    model = EstimatorModel.load(args.model)
    losses = read_loss_csv(args.losses)
    est = estimate_noise_rate(model, featurize_losses(losses, losses.size, args.classes, model.n_bins))
    print(json.dumps({"eta_hat_raw": est.raw, "eta_hat": est.clamped}, sort_keys=True))


def cmd_run(args):
    cfg = _load_config(args.config, args.seed)
    if args.forget_rate is not None:
        cfg = RunConfig.from_dict({**cfg.to_dict(), "forget_rate_override": args.forget_rate})
    d_train = data_mod.load_dataset(args.train)
    d_val = data_mod.load_dataset(args.val) if args.val else None
    d_test = data_mod.load_dataset(args.test) if args.test else None
    record = CorruptionRecord.load(args.corruption_record) if args.corruption_record else None
    estimator = None if args.baseline else _load_estimator(args.estimator, cfg)
    report = run_pipeline(d_train, d_val, d_test, cfg, estimator, record, baseline=args.baseline)
    Path(args.out).write_text(report.to_json() + "\n")
    if args.curves_csv:
        Path(args.curves_csv).write_text(report.curves_csv())
    if args.params_out:
        report.params.save(args.params_out)


def cmd_eval(args):
    params = ModelParams.load(args.params)
    d = data_mod.load_dataset(args.data)
    labels = np.where(d.true_labels >= 0, d.true_labels, d.observed_labels)
    metrics = compute_metrics(predict_proba(params, d.features, args.tau), labels)
    _write_json(args.out, metrics.to_dict())
    if args.losses_out:
        write_loss_csv(args.losses_out, per_sample_ce(params, d))


def cmd_ablate(args):
    cfg = _load_config(args.config, args.seed)
    d_train = data_mod.load_dataset(args.train)
    d_val = data_mod.load_dataset(args.val) if args.val else None
    d_test = data_mod.load_dataset(args.test)
    estimator = _load_estimator(args.estimator, cfg)
    if estimator is None:
        raise ArgumentError("ablate-forget-rate needs --estimator (or estimator_path in the config)")
    rates = _floats(args.noise_rates) if args.noise_rates else None
    rows = ablate_forget_rate(d_train, d_val, d_test, cfg, estimator, rates, args.noise_kind, args.noise_seed)
    Path(args.out).write_text(ablation_csv(rows))
    if args.json_out:
        _write_json(args.json_out, rows)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="noiselab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("make-synth", help="generate a Gaussian-cluster dataset")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--c", type=int, required=True)
    s.add_argument("--dim", type=int, required=True)
    s.add_argument("--spread", type=float, default=0.3)
    s.add_argument("--seed", type=int)
    s.add_argument("--name", default="synthetic")
    s.add_argument("--splits", help="train,validation,test fractions; writes <out>.<split>.json")
    s.add_argument("--split-seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_make_synth)

    s = sub.add_parser("inject-noise", help="corrupt training labels")
    s.add_argument("--data", required=True)
    s.add_argument("--kind", choices=["symmetric", "asymmetric"], default="symmetric")
    s.add_argument("--rate", type=float, required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--out", required=True)
    s.add_argument("--record", help="where to write the corruption record JSON")
    s.set_defaults(func=cmd_inject_noise)

    s = sub.add_parser("train-estimator", help="fit the noise-rate estimator on auxiliary datasets")
    s.add_argument("--aux", nargs="+", required=True)
    s.add_argument("--rates", default="0,0.1,0.2,0.3,0.4")
    s.add_argument("--kinds", default="symmetric")
    s.add_argument("--config")
    s.add_argument("--ridge", type=float, default=1e-6)
    s.add_argument("--seed", type=int)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_train_estimator)

    s = sub.add_parser("estimate", help="estimate the noise rate from a loss CSV")
    s.add_argument("--model", required=True)
    s.add_argument("--losses", required=True)
    s.add_argument("--classes", type=int, required=True)
    s.set_defaults(func=cmd_estimate)

    s = sub.add_parser("run", help="three-phase training run (or --baseline)")
    s.add_argument("--train", required=True)
    s.add_argument("--val")
    s.add_argument("--test")
    s.add_argument("--config")
    s.add_argument("--estimator")
    s.add_argument("--out", required=True)
    s.add_argument("--baseline", action="store_true")
    s.add_argument("--forget-rate", type=float)
    s.add_argument("--corruption-record")
    s.add_argument("--curves-csv")
    s.add_argument("--params-out", help="save the final model parameters as JSON")
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("eval", help="metrics of saved model parameters on a dataset")
    s.add_argument("--params", required=True)
    s.add_argument("--data", required=True)
    s.add_argument("--tau", type=float, default=1.0)
    s.add_argument("--out", required=True)
    s.add_argument("--losses-out", help="also write per-sample CE losses as CSV")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("ablate-forget-rate", help="fixed forget rates 0..0.4 versus the estimated one")
    s.add_argument("--train", required=True)
    s.add_argument("--val")
    s.add_argument("--test", required=True)
    s.add_argument("--config")
    s.add_argument("--estimator")
    s.add_argument("--noise-rates", help="inject these rates into a clean --train")
    s.add_argument("--noise-kind", choices=["symmetric", "asymmetric"], default="symmetric")
    s.add_argument("--noise-seed", type=int, default=0)
    s.add_argument("--seed", type=int)
    s.add_argument("--out", required=True)
    s.add_argument("--json-out")
    s.set_defaults(func=cmd_ablate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except NoiselabError as exc:
        _fail(type(exc).__name__, str(exc), getattr(exc, "phase", None))
    except (OSError, json.JSONDecodeError) as exc:
        _fail(type(exc).__name__, str(exc))
    return 0


if __name__ == "__main__":
    sys.exit(main())
