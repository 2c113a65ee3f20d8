"""Loading-path datasets and their CSV representation."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import tensors as tk
from .errors import ConfigError

CSV_HEADER = ["lambda_or_gamma", "C11", "C22", "C33", "C12", "C13", "C23",
              "S11", "S22", "S33", "S12", "S13", "S23"]
MODES = ("tension", "compression", "shear", "custom")
REF_TOL = 1e-12


def fmt(x: float) -> str:
    """17 significant digits so floats survive a text round trip."""
    return format(float(x), ".17g")


@dataclass
class Dataset:
    """Ordered (C, S) states along one loading path.

    The reference state (C = I, S = 0) is inserted at the front when absent
    and states are sorted by path parameter.
    """

    params: np.ndarray
    C: np.ndarray
    S: np.ndarray
    mode: str = "custom"
    incompressible: bool = False
    reference_parameter: float = field(default=None)

    def __post_init__(self):
        self.params = np.asarray(self.params, float).reshape(-1)
        self.C = np.asarray(self.C, float).reshape(-1, 3, 3)
        self.S = np.asarray(self.S, float).reshape(-1, 3, 3)
        if not (len(self.params) == len(self.C) == len(self.S)):
            raise ConfigError("params, C and S must have equal length")
        if self.mode not in MODES:
            raise ConfigError(f"unknown dataset mode {self.mode!r}")
        if len(self.params) == 0:
            raise ConfigError("dataset is empty")
        ref = self.reference_parameter
        if ref is None:
            ref = 0.0 if self.mode == "shear" else 1.0
        self.reference_parameter = ref
        # canonical order walks away from the reference (descending for compression)
        order = np.argsort(self.params, kind="stable")
        if np.all(self.params <= ref) and len(self.params) > 1 and np.any(self.params < ref):
            order = order[::-1]
        self.params, self.C, self.S = self.params[order], self.C[order], self.S[order]
        if not is_reference(self.C[0]):
            self.params = np.concatenate([[ref], self.params])
            self.C = np.concatenate([np.eye(3)[None], self.C])
            self.S = np.concatenate([np.zeros((1, 3, 3)), self.S])
        d = np.diff(self.params)
        if len(d) and not (np.all(d > 0) or np.all(d < 0)):
            raise ConfigError("path parameter must be strictly monotone")

    def __len__(self) -> int:
        return len(self.params)

    def subset(self, idx) -> "Dataset":
        return Dataset(self.params[idx], self.C[idx], self.S[idx], self.mode, self.incompressible,
                       self.reference_parameter)

    def to_csv(self, path) -> None:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_HEADER)
            for p, C, S in zip(self.params, self.C, self.S):
                w.writerow([fmt(p)] + [fmt(v) for v in tk.to_six(C)] + [fmt(v) for v in tk.to_six(S)])

    @classmethod
    def from_csv(cls, path, mode: str = "custom", incompressible: bool = False) -> "Dataset":
        path = Path(path)
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or [h.strip() for h in rows[0]] != CSV_HEADER:
            raise ConfigError(f"{path}: header must be {','.join(CSV_HEADER)}")
        data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
        if data.size == 0:
            raise ConfigError(f"{path}: no data rows")
        C = np.stack([tk.from_six(r[1:7]) for r in data])
        S = np.stack([tk.from_six(r[7:13]) for r in data])
        return cls(data[:, 0], C, S, mode=mode, incompressible=incompressible)


def is_reference(C, tol: float = REF_TOL) -> bool:
    return bool(np.max(np.abs(np.asarray(C) - np.eye(3))) <= tol)
