"""Command-line front end: ``tsgp generate|fit|predict|benchmark|export``.

Exit codes: 0 on success, 2 for missing input files or bad usage, 1 for
any other failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import catalog, stage1, stage2
from . import tensors as tk
from .benchmark import bundled_config, run_benchmark
from .dataset import MODES, Dataset, fmt
from .errors import TsgpError
from .model import FitConfig, TwoStageModel, fit

log = logging.getLogger("tsgp")

PREDICT_HEADER = ["parameter", "S11", "S22", "S33", "S12", "S13", "S23", "W", "psi", "chi"]


class MissingInput(Exception):
    pass


def _existing(path) -> Path:
    p = Path(path)
    if not p.is_file():
        raise MissingInput(f"no such file: {p}")
    return p


def _load_json(path) -> dict:
    return json.loads(_existing(path).read_text())


def _generator_config(args) -> dict:
    cfg = bundled_config() if args.config is None else _load_json(args.config)
    path = dict(cfg.get("path", {}))
    for key in ("mode", "start", "stop", "n_points", "nu"):
        value = getattr(args, key, None)
        if value is not None:
            path[key] = value
    cfg["path"] = path
    return cfg


def _fit_config(args) -> FitConfig:
    base = {}
    if getattr(args, "fit_config", None):
        base = _load_json(args.fit_config)
        base = base.get("fit", base)
    cfg = FitConfig.from_dict(base)
    if args.cutoff is not None:
        cfg.cutoff = args.cutoff
    if args.seed is not None:
        cfg.seed = args.seed
    if args.vol_nugget is not None:
        cfg.vol_nuggets = stage1.NuggetPolicy(cfg.vol_nuggets.reference, args.vol_nugget)
    if args.vol_nugget_ref is not None:
        cfg.vol_nuggets = stage1.NuggetPolicy(args.vol_nugget_ref, cfg.vol_nuggets.default)
    if args.iso_nugget is not None:
        cfg.iso_nuggets = stage1.NuggetPolicy(args.iso_nugget, args.iso_nugget)
    if args.damage_nugget is not None:
        cfg.damage_nugget = args.damage_nugget
    if args.penalty is not None:
        from dataclasses import replace
        cfg.constraints = replace(cfg.constraints, penalty_nn=args.penalty, penalty_mono=args.penalty)
    return cfg


def _read_dataset(args) -> Dataset:
    return Dataset.from_csv(_existing(args.data), mode=args.mode or "custom",
                            incompressible=args.incompressible)


def _query_path(args):
    """(params, C) from --data or from a generated path."""
    if args.data:
        d = Dataset.from_csv(_existing(args.data), mode=args.mode or "custom")
        return d.params, d.C
    mode = args.path_mode
    defaults = {"tension": (1.0, 1.5), "compression": (1.0, 0.5), "shear": (0.0, 0.8),
                "incompressible_uniaxial": (1.0, 1.5)}[mode]
    start = defaults[0] if args.start is None else args.start
    stop = defaults[1] if args.stop is None else args.stop
    nu = 0.0 if mode == "shear" else args.nu
    path = catalog.DeformationPath(mode, start, stop, args.n_points, nu)
    return catalog.generate_path(path)


# -- commands ----------------------------------------------------------------

def cmd_generate(args) -> int:
    cfg = _generator_config(args)
    vol, iso, law, path = catalog.models_from_config(cfg)
    data = catalog.generate_dataset(vol, iso, law, path)
    data.to_csv(args.out)
    print(f"wrote {len(data)} states to {args.out}")
    return 0


def _fit_report(model: TwoStageModel, trace) -> str:
    lines = []
    for name, gp in (("m_vol", model.m_vol), ("m_iso", model.m_iso), ("m_dam", model.m_dam.gp)):
        if gp is None:
            continue
        hp = gp.hyperparameters
        lines.append(f"{name}: n={gp.n} sigma_f^2={hp.signal_variance:.6g} "
                     f"ell={hp.length_scale:.6g} nlml={gp.nlml_value:.6g}")
    r = model.m_dam.residuals()
    lines.append(f"W_peak={model.m_dam.w_peak:.6g}")
    lines.append(f"penalty_nn={model.m_dam.penalties.get('nn', 0.0):.6g} "
                 f"penalty_mono={model.m_dam.penalties.get('mono', 0.0):.6g}")
    lines.append(f"min chi at constraints={r['min_chi']:.6g} max dchi/dW={r['max_dchi_dW']:.6g}")
    lines.append(f"constraint_violation={model.m_dam.constraint_violation}")
    lines.append("chi trace (parameter, W, chi):")
    for p, W, c in zip(trace.params, trace.W, trace.chi):
        lines.append(f"  {p:.6g} {W:.6g} {c:.6g}")
    return "\n".join(lines)


def cmd_fit(args) -> int:
    data = _read_dataset(args)
    cfg = _fit_config(args)
    model = fit(data, cfg)
    model.save(args.out)
    trace = stage2.build_stage2_dataset(data, model.m_vol, model.m_iso)
    report = _fit_report(model, trace)
    report_path = Path(args.report) if args.report else Path(args.out).with_suffix(".report.txt")
    report_path.write_text(report + "\n")
    if args.trace:
        trace.to_csv(args.trace)
    print(f"wrote {args.out} and {report_path}")
    return 0


def cmd_predict(args) -> int:
    model = TwoStageModel.load(_existing(args.model))
    params, Cs = _query_path(args)
    pred = model.predict_path(Cs, params)
    with Path(args.out).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(PREDICT_HEADER)
        for i, p in enumerate(params):
            w.writerow([fmt(p)] + [fmt(v) for v in tk.to_six(pred.S[i])]
                       + [fmt(pred.W[i]), fmt(pred.psi[i]), fmt(pred.chi[i])])
    print(f"wrote {len(params)} rows to {args.out}")
    return 0


def cmd_benchmark(args) -> int:
    cfg = bundled_config() if args.config is None else _load_json(args.config)
    paths = ("tension", "compression", "shear") if args.ood else ("tension",)
    fit_cfg = FitConfig.from_dict(cfg.get("fit", {}))
    if args.seed is not None:
        fit_cfg.seed = args.seed
    result = run_benchmark(cfg, paths, fit_cfg)
    result.write(args.out_dir)
    print(result.text())
    return 0


def cmd_export(args) -> int:
    model = TwoStageModel.load(_existing(args.model))
    if args.what == "trace":
        data = Dataset.from_csv(_existing(args.data), mode=args.mode or "custom",
                                incompressible=model.incompressible)
        stage2.build_stage2_dataset(data, model.m_vol, model.m_iso).to_csv(args.out)
    elif args.what == "stiffness":
        params, Cs = _query_path(args)
        W = model.predict_path(Cs, params).W
        labels = [f"D{a}{b}" for a in tk.VOIGT_LABELS for b in tk.VOIGT_LABELS]
        with Path(args.out).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["parameter"] + labels)
            for p, C, Wi in zip(params, Cs, W):
                CC = model.tangent_stiffness(C, Wi)
                D = [CC[i, j, k, l] for (i, j) in tk.VOIGT_INDEX for (k, l) in tk.VOIGT_INDEX]
                w.writerow([fmt(p)] + [fmt(v) for v in D])
    else:
        Path(args.out).write_text(json.dumps(model.metadata, sort_keys=True, indent=1) + "\n")
    print(f"wrote {args.out}")
    return 0


# -- argument parsing --------------------------------------------------------

def _path_args(p, data_help="dataset CSV whose states define the query path"):
    p.add_argument("--data", help=data_help)
    p.add_argument("--path-mode", default="tension", choices=catalog.PATH_MODES)
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--n-points", type=int, default=51)
    p.add_argument("--nu", type=float, default=0.49)
    p.add_argument("--mode", choices=MODES, help="dataset mode used when reading --data")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tsgp", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic dataset CSV")
    g.add_argument("--config", help="generator JSON (default: bundled synthetic benchmark)")
    g.add_argument("--out", required=True)
    g.add_argument("--mode", choices=catalog.PATH_MODES)
    g.add_argument("--start", type=float)
    g.add_argument("--stop", type=float)
    g.add_argument("--n-points", dest="n_points", type=int)
    g.add_argument("--nu", type=float)
    g.set_defaults(func=cmd_generate)

    f = sub.add_parser("fit", help="train a two-stage model")
    f.add_argument("data")
    f.add_argument("--out", required=True)
    f.add_argument("--mode", choices=MODES)
    f.add_argument("--incompressible", action="store_true")
    f.add_argument("--fit-config", help="JSON with fit options (or a config with a 'fit' block)")
    f.add_argument("--cutoff", type=float)
    f.add_argument("--seed", type=int)
    f.add_argument("--vol-nugget", type=float)
    f.add_argument("--vol-nugget-ref", type=float)
    f.add_argument("--iso-nugget", type=float)
    f.add_argument("--damage-nugget", type=float)
    f.add_argument("--penalty", type=float, help="both constraint penalty weights")
    f.add_argument("--report")
    f.add_argument("--trace", help="write the (W, chi) trace CSV here")
    f.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="stress, energy and chi along a path")
    p.add_argument("model")
    p.add_argument("--out", required=True)
    _path_args(p)
    p.set_defaults(func=cmd_predict)

    b = sub.add_parser("benchmark", help="compare the four models on synthetic data")
    b.add_argument("--config")
    b.add_argument("--out-dir", default="benchmark_out")
    b.add_argument("--ood", action="store_true", help="also score compression and shear")
    b.add_argument("--seed", type=int)
    b.set_defaults(func=cmd_benchmark)

    e = sub.add_parser("export", help="export the chi trace, tangent stiffness or metadata")
    e.add_argument("model")
    e.add_argument("--what", choices=("trace", "stiffness", "metadata"), default="trace")
    e.add_argument("--out", required=True)
    _path_args(e)
    e.set_defaults(func=cmd_export)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (MissingInput, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (TsgpError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
