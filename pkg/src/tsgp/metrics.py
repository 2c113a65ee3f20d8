"""Relative stress error and per-path error summaries."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import tensors as tk
from .dataset import fmt


def relative_error(pred, truth) -> float:
    """100 * ||pred - truth||_F / ||truth||_F; NaN when the truth vanishes."""
    n = tk.frobenius_norm(truth)
    if n == 0.0:
        return float("nan")
    return 100.0 * tk.frobenius_norm(np.asarray(pred, float) - np.asarray(truth, float)) / n


@dataclass
class ErrorReport:
    """Pointwise errors; states with zero true stress are excluded from the summary."""

    params: np.ndarray
    errors: np.ndarray

    @classmethod
    def from_stresses(cls, params, pred, truth) -> "ErrorReport":
        e = np.array([relative_error(p, t) for p, t in zip(pred, truth)])
        return cls(np.asarray(params, float), e)

    @property
    def valid(self) -> np.ndarray:
        return np.isfinite(self.errors)

    @property
    def excluded(self) -> int:
        return int(np.sum(~self.valid))

    @property
    def mean(self) -> float:
        return float(np.mean(self.errors[self.valid]))

    @property
    def max(self) -> float:
        return float(np.max(self.errors[self.valid]))

    @property
    def argmax(self) -> int:
        e = np.where(self.valid, self.errors, -np.inf)
        return int(np.argmax(e))

    def to_csv(self, path, label: str = "error_percent") -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["parameter", label])
            for p, e in zip(self.params, self.errors):
                w.writerow([fmt(p), "" if not np.isfinite(e) else fmt(e)])
