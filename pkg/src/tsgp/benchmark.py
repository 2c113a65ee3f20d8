"""Four-model comparison on synthetic ground truth."""
from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from . import baselines, catalog
from .dataset import fmt
from .metrics import ErrorReport
from .model import FitConfig, TwoStageModel, fit

MODEL_NAMES = ("proposed", "analytical", "blackbox", "direct")


def bundled_config() -> dict:
    """Generator and fit settings for the synthetic tension benchmark."""
    text = resources.files("tsgp").joinpath("data/synthetic_benchmark.json").read_text()
    return json.loads(text)


@dataclass
class BenchmarkResult:
    reports: dict = field(default_factory=dict)  # (model, path) -> ErrorReport
    timings: dict = field(default_factory=dict)  # model -> seconds to train
    models: dict = field(default_factory=dict)
    predictions: dict = field(default_factory=dict)  # (model, path) -> stresses

    def rows(self):
        for (name, path), rep in self.reports.items():
            yield name, path, rep.mean, rep.max, rep.excluded

    def write(self, out_dir) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with (out / "table.csv").open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["model", "path", "mean_percent", "max_percent", "excluded_states", "train_seconds"])
            for name, path, mean, mx, excl in self.rows():
                w.writerow([name, path, fmt(mean), fmt(mx), excl, fmt(self.timings.get(name, 0.0))])
        (out / "table.txt").write_text(self.text() + "\n")
        paths = sorted({p for _, p in self.reports})
        for path in paths:
            names = [n for n in MODEL_NAMES if (n, path) in self.reports]
            params = self.reports[(names[0], path)].params
            with (out / f"errors_{path}.csv").open("w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["parameter"] + names)
                for i, p in enumerate(params):
                    row = [fmt(p)]
                    for n in names:
                        e = self.reports[(n, path)].errors[i]
                        row.append(fmt(e) if np.isfinite(e) else "")
                    w.writerow(row)

    def text(self) -> str:
        lines = ["Relative stress error in percent (the exact reference state is excluded)",
                 f"{'model':<12}{'path':<13}{'mean':>10}{'max':>10}"]
        for name, path, mean, mx, _ in self.rows():
            lines.append(f"{name:<12}{path:<13}{_num(mean):>10}{_num(mx):>10}")
        return "\n".join(lines)


def _num(x: float) -> str:
    return f"{x:.2f}" if abs(x) < 1e6 else f"{x:.2e}"


def _path_for(mode: str, base: catalog.DeformationPath) -> catalog.DeformationPath:
    if mode == base.mode:
        return base
    if mode == "compression":
        return catalog.DeformationPath.compression(nu=base.nu)
    if mode == "shear":
        return catalog.DeformationPath.shear()
    return catalog.DeformationPath.tension(nu=base.nu)


def run_benchmark(config: Optional[dict] = None, paths=("tension",),
                  fit_config: Optional[FitConfig] = None) -> BenchmarkResult:
    """Train every model on the configured path and score it on ``paths``."""
    config = bundled_config() if config is None else config
    vol, iso, law, base = catalog.models_from_config(config)
    train = catalog.generate_dataset(vol, iso, law, base)
    if fit_config is None:
        fit_config = FitConfig.from_dict(config.get("fit", {}))

    res = BenchmarkResult()
    t = time.perf_counter()
    res.models["proposed"] = fit(train, fit_config)
    res.timings["proposed"] = time.perf_counter() - t
    t = time.perf_counter()
    res.models["analytical"] = baselines.AnalyticalBenchmark()
    res.timings["analytical"] = time.perf_counter() - t
    t = time.perf_counter()
    res.models["blackbox"] = baselines.train_blackbox(train, restarts=fit_config.restarts, seed=fit_config.seed)
    res.timings["blackbox"] = time.perf_counter() - t
    t = time.perf_counter()
    res.models["direct"] = baselines.train_direct(train, fit_config.vol_nuggets, fit_config.iso_nuggets,
                                                  fit_config.restarts, fit_config.seed,
                                                  fit_config.length_scale_floor)
    res.timings["direct"] = time.perf_counter() - t

    for mode in paths:
        data = catalog.generate_dataset(vol, iso, law, _path_for(mode, base))
        for name in MODEL_NAMES:
            m = res.models[name]
            if isinstance(m, TwoStageModel):
                S = m.predict_path(data.C, data.params).S
            else:
                S = m.predict_stress(data.C)
            res.predictions[(name, mode)] = S
            # drop the reference state, where the metric is undefined
            res.reports[(name, mode)] = ErrorReport.from_stresses(data.params[1:], S[1:], data.S[1:])
    return res
