"""Reference models for benchmarking the two-stage regressor.

* ``AnalyticalBenchmark``: closed-form Yeoh + volumetric neo-Hookean energy
  with an exponential stress-reduction factor.
* ``BlackBoxModel``: one GP from the nine components of C to those of S.
* ``DirectModel``: the invariant/tensor-basis representation fitted in a
  single step to damaged data, so damage is folded into the response
  functions.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import catalog, gpr, stage1, stage2
from . import tensors as tk
from .dataset import Dataset
from .errors import ModelFormatError, TooFewPoints

BLACKBOX_NUGGET = 1e-2


@dataclass(frozen=True)
class AnalyticalBenchmark:
    """Calibrated closed-form model; parameters default to the reference calibration."""

    kappa: float = 99.28
    C1: float = 1.73
    C2: float = -0.55
    Phi: float = 3.05

    def __post_init__(self):
        if not (self.kappa > 0 and self.Phi > 0):
            raise ValueError("kappa and Phi must be positive")

    @property
    def parts(self):
        return (catalog.VolNeoHookean(self.kappa), catalog.Yeoh(self.C1, self.C2),
                catalog.VolokhReduced(self.Phi))

    def energy(self, C) -> float:
        vol, iso, _ = self.parts
        return catalog.intact_energy(vol, iso, tk.invariants(C))

    def stress(self, C) -> np.ndarray:
        """Closed form; W depends on the current state only, so no history is needed."""
        vol, iso, law = self.parts
        W = self.energy(C)
        return float(law.chi(W)) * catalog.intact_stress(vol, iso, C)

    def predict_stress(self, Cs) -> np.ndarray:
        return np.stack([self.stress(C) for C in np.asarray(Cs, float).reshape(-1, 3, 3)])


@dataclass
class BlackBoxModel:
    gp: gpr.GprModel

    def predict_stress(self, Cs) -> np.ndarray:
        Cs = np.asarray(Cs, float).reshape(-1, 3, 3)
        X = Cs.reshape(len(Cs), 9)
        return self.gp.predict(X).reshape(-1, 3, 3)

    def to_dict(self) -> dict:
        return {"kind": "blackbox", "model": self.gp.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "BlackBoxModel":
        if d.get("kind") != "blackbox":
            raise ModelFormatError(f"expected a blackbox model, got kind {d.get('kind')!r}")
        return cls(gpr.GprModel.from_dict(d["model"]))


def train_blackbox(data: Dataset, nugget: float = BLACKBOX_NUGGET,
                   restarts: int = gpr.DEFAULT_RESTARTS, seed: int = gpr.DEFAULT_SEED) -> BlackBoxModel:
    if len(data) < 3:
        raise TooFewPoints("black-box model needs at least 3 states")
    X = data.C.reshape(len(data), 9)
    Y = data.S.reshape(len(data), 9)
    # Stress components that vanish on every training state say nothing about
    # the signal scale but would pull sigma_f towards zero, so they are left
    # out of the likelihood.  Their predictions are still exactly zero.
    informative = np.any(Y != 0.0, axis=0)
    gp = gpr.optimize(X, Y, np.full(len(data), float(nugget)), restarts=restarts, seed=seed,
                      fit_columns=informative)
    return BlackBoxModel(gp)


@dataclass
class DirectModel:
    m_vol: Optional[gpr.GprModel]
    m_iso: gpr.GprModel
    incompressible: bool = False

    def predict_stress(self, Cs) -> np.ndarray:
        return stage2.predict_intact_path(self.m_vol, self.m_iso, Cs, self.incompressible)

    def to_dict(self) -> dict:
        d = {"kind": "direct", "incompressible": self.incompressible, "m_iso": self.m_iso.to_dict()}
        if self.m_vol is not None:
            d["m_vol"] = self.m_vol.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DirectModel":
        if d.get("kind") != "direct":
            raise ModelFormatError(f"expected a direct model, got kind {d.get('kind')!r}")
        m_vol = gpr.GprModel.from_dict(d["m_vol"]) if "m_vol" in d else None
        return cls(m_vol, gpr.GprModel.from_dict(d["m_iso"]), bool(d.get("incompressible", False)))


def train_direct(data: Dataset, vol_nuggets: stage1.NuggetPolicy = stage1.VOL_NUGGETS,
                 iso_nuggets: stage1.NuggetPolicy = stage1.ISO_NUGGETS,
                 restarts: int = gpr.DEFAULT_RESTARTS, seed: int = gpr.DEFAULT_SEED,
                 length_scale_floor: Optional[float] = stage1.LENGTH_SCALE_FLOOR) -> DirectModel:
    """Stage I training on the whole dataset: the targets absorb chi."""
    if len(data) < 3:
        raise TooFewPoints("direct model needs at least 3 states")
    full = stage1.train_stage1(data, data.params[-1], vol_nuggets, iso_nuggets, restarts, seed,
                               length_scale_floor)
    return DirectModel(full.m_vol, full.m_iso, data.incompressible)


def save_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj.to_dict(), sort_keys=True, indent=1) + "\n")
