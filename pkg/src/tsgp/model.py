"""The assembled two-stage material model.

Stage I supplies the intact stress from (zeta, Gamma1, Gamma2); Stage II scales
it by chi(W), with W the intact energy accumulated along the loading history.
Besides stress and energy along a path, the model gives the failure energy
and the material and spatial tangent stiffness.
"""
from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import catalog, gpr, stage1, stage2
from . import tensors as tk
from .constrained import DAMAGE_NUGGET, ConstraintConfig, DamageModel, train_damage_model
from .dataset import Dataset
from .errors import ConfigError, ModelFormatError, PathNotAnchored

log = logging.getLogger(__name__)

FORMAT_VERSION = "tsm-1"
FD_REL_STEP = 1e-6
PLATEAU_FRACTION = 0.1
PLATEAU_RTOL = 1e-3


@dataclass
class FitConfig:
    """Everything needed to train a model from a dataset."""

    cutoff: float = 1.25
    vol_nuggets: stage1.NuggetPolicy = stage1.VOL_NUGGETS
    iso_nuggets: stage1.NuggetPolicy = stage1.ISO_NUGGETS
    damage_nugget: float = DAMAGE_NUGGET
    constraints: ConstraintConfig = field(default_factory=ConstraintConfig)
    length_scale_floor: Optional[float] = stage1.LENGTH_SCALE_FLOOR
    restarts: int = gpr.DEFAULT_RESTARTS
    seed: int = gpr.DEFAULT_SEED

    def to_dict(self) -> dict:
        return {
            "cutoff": self.cutoff,
            "vol_nuggets": self.vol_nuggets.to_dict(),
            "iso_nuggets": self.iso_nuggets.to_dict(),
            "damage_nugget": self.damage_nugget,
            "constraints": self.constraints.to_dict(),
            "length_scale_floor": self.length_scale_floor,
            "restarts": self.restarts,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FitConfig":
        d = dict(d)
        out = cls()
        for key in ("vol_nuggets", "iso_nuggets"):
            if key in d:
                setattr(out, key, stage1.NuggetPolicy(**d.pop(key)))
        if "constraints" in d:
            out.constraints = ConstraintConfig.from_dict(d.pop("constraints"))
        for key, value in d.items():
            if not hasattr(out, key):
                raise ConfigError(f"unknown fit option {key!r}")
            setattr(out, key, value)
        return out


@dataclass
class PathPrediction:
    params: Optional[np.ndarray]
    C: np.ndarray
    S: np.ndarray
    S_intact: np.ndarray
    W: np.ndarray
    chi: np.ndarray
    psi: np.ndarray


@dataclass
class FailureEnergyEstimate:
    psi_f: float
    converged: bool
    plateau_window: tuple
    relative_change: float


def _stretch_params(Cs):
    return np.sqrt(Cs[:, 0, 0])


@dataclass
class TwoStageModel:
    m_vol: Optional[gpr.GprModel]
    m_iso: gpr.GprModel
    m_dam: DamageModel
    incompressible: bool = False
    metadata: dict = field(default_factory=dict)

    # -- prediction along a path -------------------------------------------

    def _check_path(self, Cs):
        Cs = np.asarray(Cs, float).reshape(-1, 3, 3)
        if len(Cs) == 0 or not np.allclose(Cs[0], np.eye(3), rtol=0, atol=1e-12):
            raise PathNotAnchored("prediction paths must start at C = I")
        return Cs

    def _energy(self, Cs, S, params):
        if self.incompressible and params is None:
            params = _stretch_params(Cs)
        return stage2.integrate_energy(Cs, S, params, self.incompressible)

    def intact_stress(self, Cs) -> np.ndarray:
        return stage2.predict_intact_path(self.m_vol, self.m_iso, Cs, self.incompressible)

    def predict_path(self, Cs, params=None) -> PathPrediction:
        """Stress, intact and total energy, and chi along an anchored path."""
        Cs = self._check_path(Cs)
        S_int = self.intact_stress(Cs)
        W = self._energy(Cs, S_int, params)
        chi = self.m_dam.chi(W)
        S = chi[:, None, None] * S_int
        psi = self._energy(Cs, S, params)
        return PathPrediction(None if params is None else np.asarray(params, float), Cs, S, S_int,
                              W, chi, psi)

    def predict_stress(self, Cs, params=None) -> np.ndarray:
        return self.predict_path(Cs, params).S

    def predict_energy(self, Cs, params=None):
        """(W, psi): intact and damage-limited energy along the path."""
        p = self.predict_path(Cs, params)
        return p.W, p.psi

    def predict_dataset(self, data: Dataset) -> PathPrediction:
        return self.predict_path(data.C, data.params)

    # -- failure energy ----------------------------------------------------

    def estimate_failure_energy(self, max_parameter: float = 2.0, n_points: int = 201,
                                mode: Optional[str] = None, nu: float = 0.49) -> FailureEnergyEstimate:
        """Terminal value of psi on a uniaxial path extended to ``max_parameter``.

        Converged when psi changes by at most 0.1% over the last tenth of the path.
        """
        if mode is None:
            mode = "incompressible_uniaxial" if self.incompressible else "tension"
        path = catalog.DeformationPath(mode, 1.0, float(max_parameter), int(n_points), nu)
        params, Cs = catalog.generate_path(path)
        psi = self.predict_path(Cs, params).psi
        k = max(1, int(round(PLATEAU_FRACTION * (len(params) - 1))))
        psi_f = float(psi[-1])
        change = abs(psi_f - psi[-1 - k]) / abs(psi_f) if psi_f != 0 else float("inf")
        converged = bool(change <= PLATEAU_RTOL)
        if not converged:
            log.warning("failure energy not converged: relative change %.3g over final window", change)
        return FailureEnergyEstimate(psi_f, converged, (float(params[-1 - k]), float(params[-1])),
                                     float(change))

    # -- tangent stiffness -------------------------------------------------

    def _response_derivatives(self, inv: tk.Invariants):
        """Values and central-FD derivatives of the Stage I posterior means."""
        J, I1, I2 = inv
        if self.m_vol is None:
            zeta, dzeta = 0.0, 0.0
        else:
            h = FD_REL_STEP * abs(J)
            zp, z0, zm = self.m_vol.predict(np.array([[J + h], [J], [J - h]]))[:, 0]
            zeta, dzeta = z0, (zp - zm) / (2 * h)
        h1, h2 = FD_REL_STEP * abs(I1), FD_REL_STEP * abs(I2)
        q = np.array([[I1, I2], [I1 + h1, I2], [I1 - h1, I2], [I1, I2 + h2], [I1, I2 - h2]])
        g = self.m_iso.predict(q)
        dG_dI1 = (g[1] - g[2]) / (2 * h1)
        dG_dI2 = (g[3] - g[4]) / (2 * h2)
        return zeta, dzeta, g[0], dG_dI1, dG_dI2

    def intact_stiffness(self, C) -> np.ndarray:
        """2 dS_intact/dC assembled from the closed-form basis derivatives."""
        if self.incompressible:
            raise ConfigError("tangent stiffness is available for compressible models only")
        C = np.asarray(C, float)
        inv = tk.invariants(C)
        J = inv.J
        Ci = tk.inv3(C)
        I = np.eye(3)
        trC = np.trace(C)
        trC2 = np.trace(C @ C)
        s = J ** (-2.0 / 3.0)
        G1, G2, G3 = tk.tensor_basis(C)
        zeta, dzeta, (g1, g2), dg_dI1, dg_dI2 = self._response_derivatives(inv)

        CiCi = tk.odot(Ci, Ci)
        dJ = 0.5 * J * Ci
        dG1 = -CiCi
        dI1 = s * (I - trC / 3.0 * Ci)
        dI2 = s * s * (trC * I - C - (trC * trC - trC2) / 3.0 * Ci)
        dG2 = -(tk.dyad(Ci, I) - trC * CiCi) / 3.0
        dG3 = s * (tk.sym_identity4() - 2.0 / 3.0 * tk.dyad(Ci, C) + trC2 / 3.0 * CiCi
                   - tk.dyad(C, Ci) / 3.0 + trC2 / 9.0 * tk.dyad(Ci, Ci))
        ds = -s / 3.0 * Ci

        dg1 = dg_dI1[0] * dI1 + dg_dI2[0] * dI2
        dg2 = dg_dI1[1] * dI1 + dg_dI2[1] * dI2
        dS = (dzeta * tk.dyad(G1, dJ) + zeta * dG1
              + tk.dyad(g1 * G2 + g2 * G3, ds)
              + s * (tk.dyad(G2, dg1) + g1 * dG2 + tk.dyad(G3, dg2) + g2 * dG3))
        return 2.0 * dS

    def tangent_stiffness(self, C, W: float) -> np.ndarray:
        """Material tangent 2 dS/dC at a state with accumulated intact energy W.

        Adds the damage term chi'(W) S_intact x S_intact to chi times the
        intact tangent, since dW/dC = S_intact / 2.
        """
        C = np.asarray(C, float)
        S_int = stage2.predict_intact_stress(self.m_vol, self.m_iso, C, self.incompressible)
        chi = float(self.m_dam.chi(W)[0])
        dchi = float(self.m_dam.dchi_dW(W)[0])
        return chi * self.intact_stiffness(C) + dchi * tk.dyad(S_int, S_int)

    def tangent_stiffness_path(self, Cs, index: int) -> np.ndarray:
        """Tangent at ``Cs[index]`` with W accumulated along the given path."""
        Cs = self._check_path(Cs)
        W = self._energy(Cs, self.intact_stress(Cs), None)
        return self.tangent_stiffness(Cs[index], W[index])

    @staticmethod
    def spatial_stiffness(CC, F) -> np.ndarray:
        return tk.push_forward(CC, F)

    # -- persistence -------------------------------------------------------

    def to_dict(self) -> dict:
        d = {
            "kind": "two_stage",
            "version": FORMAT_VERSION,
            "mode": "incompressible" if self.incompressible else "compressible",
            "m_iso": self.m_iso.to_dict(),
            "m_dam": self.m_dam.to_dict(),
            "metadata": self.metadata,
        }
        if self.m_vol is not None:
            d["m_vol"] = self.m_vol.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TwoStageModel":
        if d.get("version") != FORMAT_VERSION:
            raise ModelFormatError(f"expected model version {FORMAT_VERSION!r}, got {d.get('version')!r}")
        mode = d.get("mode")
        if mode not in ("compressible", "incompressible"):
            raise ModelFormatError(f"bad model mode {mode!r}")
        try:
            m_vol = gpr.GprModel.from_dict(d["m_vol"]) if "m_vol" in d else None
            m_iso = gpr.GprModel.from_dict(d["m_iso"])
            m_dam = DamageModel.from_dict(d["m_dam"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelFormatError(f"malformed model bundle: {exc}") from exc
        if mode == "compressible" and m_vol is None:
            raise ModelFormatError("compressible model without m_vol")
        return cls(m_vol, m_iso, m_dam, mode == "incompressible", dict(d.get("metadata", {})))

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    def save(self, path) -> None:
        Path(path).write_text(self.dumps() + "\n")

    @classmethod
    def load(cls, path) -> "TwoStageModel":
        try:
            d = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"{path}: not valid JSON ({exc})") from exc
        if d.get("kind", "two_stage") != "two_stage":
            raise ModelFormatError(f"{path}: holds a {d.get('kind')!r} model")
        return cls.from_dict(d)


def fit(data: Dataset, config: FitConfig = None) -> TwoStageModel:
    """Train Stage I on the intact prefix, then the constrained damage model."""
    config = FitConfig() if config is None else config
    s1 = stage1.train_stage1(data, config.cutoff, config.vol_nuggets, config.iso_nuggets,
                             config.restarts, config.seed, config.length_scale_floor)
    trace = stage2.build_stage2_dataset(data, s1.m_vol, s1.m_iso)
    W, chi = trace.training_pairs()
    m_dam = train_damage_model(W, chi, config.constraints, config.damage_nugget,
                               config.restarts, config.seed)
    meta = {
        "n_states": len(data),
        "n_intact": len(s1.intact),
        "path_mode": data.mode,
        "fit": config.to_dict(),
    }
    return TwoStageModel(s1.m_vol, s1.m_iso, m_dam, data.incompressible, meta)
