"""Stage II: penalised GP regression of chi(W).

The damage regressor is an ordinary scalar GP whose hyperparameters minimise
NLML + non-negativity penalty + monotonicity penalty, both evaluated on the
posterior mean at a set of constraint energies.  Complete failure at large W
enters through zero-valued augmentation points beyond the observed peak.
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import cho_solve

from . import gpr
from .errors import EmptyDataset, TooFewPoints
from .gpr import SQRT5, GprModel, Hyperparameters

log = logging.getLogger(__name__)

CONSTRAINT_TOL = 1e-3
DAMAGE_NUGGET = 1e-4


@dataclass(frozen=True)
class ConstraintConfig:
    """Penalty and augmentation settings.

    Constraint energies are either given explicitly (``constraint_points``) or
    spread uniformly over ``constraint_range`` times W_peak.
    """

    penalty_nn: float = 1e3
    penalty_mono: float = 1e3
    constraint_range: tuple = (0.8, 1.7)
    n_constraints: int = 30
    constraint_points: Optional[tuple] = None
    augmentation_range: tuple = (1.3, 2.6)
    augmentation_count: int = 10

    def __post_init__(self):
        a, b = self.augmentation_range
        if not b > a > 1:
            raise ValueError(f"augmentation range needs b > a > 1, got {(a, b)}")
        if self.penalty_nn < 0 or self.penalty_mono < 0:
            raise ValueError("penalty weights must be non-negative")
        if self.augmentation_count < 0:
            raise ValueError("augmentation_count must be >= 0")
        if self.constraint_points is not None:
            pts = np.asarray(self.constraint_points, float)
            if np.any(pts < 0) or np.any(np.diff(pts) < 0):
                raise ValueError("constraint points must be non-negative and ascending")

    def points(self, w_peak: float) -> np.ndarray:
        if self.constraint_points is not None:
            return np.asarray(self.constraint_points, float)
        lo, hi = self.constraint_range
        return np.linspace(lo * w_peak, hi * w_peak, self.n_constraints)

    def unconstrained(self) -> "ConstraintConfig":
        d = asdict(self)
        d.update(penalty_nn=0.0, penalty_mono=0.0)
        return ConstraintConfig(**d)

    def to_dict(self) -> dict:
        d = asdict(self)
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in d.items()}

    @classmethod
    def from_dict(cls, d: dict) -> "ConstraintConfig":
        d = dict(d)
        for k in ("constraint_range", "augmentation_range", "constraint_points"):
            if d.get(k) is not None:
                d[k] = tuple(d[k])
        return cls(**d)


def kernel_derivative(W, Wp, hp: Hyperparameters):
    """d k(W, W') / d W' for the Matern-5/2 kernel (broadcasts)."""
    diff = np.asarray(W, float) - np.asarray(Wp, float)
    a = SQRT5 * np.abs(diff) / hp.length_scale
    return hp.signal_variance * (5.0 * diff / (3.0 * hp.length_scale ** 2)) * (1.0 + a) * np.exp(-a)


def derivative_posterior_mean(model: GprModel, Wc) -> np.ndarray:
    """Posterior mean of d chi / dW at the energies ``Wc``."""
    Wc = np.atleast_1d(np.asarray(Wc, float))
    dK = kernel_derivative(model.inputs[:, 0][:, None], Wc[None, :], model.hyperparameters)
    return dK.T @ model.weights[:, 0]


def _posterior(W, chi, nuggets, hp, Wc):
    """Mean and derivative mean at Wc for fixed data and hyperparameters."""
    _, L = gpr.gram(W[:, None], hp, nuggets)
    alpha = cho_solve((L, True), chi)
    Ks = gpr.matern52(np.abs(W[:, None] - Wc[None, :]), hp)
    dK = kernel_derivative(W[:, None], Wc[None, :], hp)
    return Ks.T @ alpha, dK.T @ alpha


def penalty_nn(mean_at_constraints, weight: float) -> float:
    v = np.minimum(0.0, np.asarray(mean_at_constraints, float))
    return float(weight * np.sum(v * v))


def penalty_mono(deriv_at_constraints, weight: float) -> float:
    v = np.minimum(0.0, -np.asarray(deriv_at_constraints, float))
    return float(weight * np.sum(v * v))


def augment_failure_points(W, chi, config: ConstraintConfig):
    """Append ``augmentation_count`` zero-chi points over [a, b] * W_peak.

    Returns (W_aug, chi_aug, w_peak) with W_peak taken before augmentation.
    """
    W = np.asarray(W, float).reshape(-1)
    chi = np.asarray(chi, float).reshape(-1)
    if W.size == 0:
        raise EmptyDataset("no (W, chi) pairs to augment")
    w_peak = float(np.max(W))
    if config.augmentation_count == 0:
        return W.copy(), chi.copy(), w_peak
    a, b = config.augmentation_range
    extra = np.linspace(a * w_peak, b * w_peak, config.augmentation_count)
    return np.concatenate([W, extra]), np.concatenate([chi, np.zeros_like(extra)]), w_peak


@dataclass
class DamageModel:
    gp: GprModel
    w_peak: float
    config: ConstraintConfig
    penalties: dict = field(default_factory=dict)
    constraint_violation: bool = False

    def chi(self, W) -> np.ndarray:
        return self.gp.predict(np.atleast_1d(np.asarray(W, float)))[:, 0]

    def dchi_dW(self, W) -> np.ndarray:
        return derivative_posterior_mean(self.gp, W)

    def constraint_points(self) -> np.ndarray:
        return self.config.points(self.w_peak)

    def residuals(self) -> dict:
        """Unweighted constraint residuals at the constraint points."""
        Wc = self.constraint_points()
        m, d = self.chi(Wc), self.dchi_dW(Wc)
        return {"min_chi": float(np.min(m)), "max_dchi_dW": float(np.max(d)),
                "nn": penalty_nn(m, 1.0), "mono": penalty_mono(d, 1.0)}

    def to_dict(self) -> dict:
        d = self.gp.to_dict()
        d.update(w_peak=self.w_peak, constraint_config=self.config.to_dict())
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DamageModel":
        model = cls(GprModel.from_dict(d), float(d["w_peak"]),
                    ConstraintConfig.from_dict(d["constraint_config"]))
        model._flag()
        return model

    def _flag(self):
        r = self.residuals()
        self.penalties = {"nn": r["nn"] * self.config.penalty_nn,
                          "mono": r["mono"] * self.config.penalty_mono}
        self.constraint_violation = r["min_chi"] < -CONSTRAINT_TOL or r["max_dchi_dW"] > CONSTRAINT_TOL


def penalized_objective(W, chi, nuggets, config: ConstraintConfig, Wc):
    """Objective in log-hyperparameter space; plain NLML when both weights are 0."""
    Z = W[:, None]
    Y = chi[:, None]
    if config.penalty_nn == 0 and config.penalty_mono == 0:
        return lambda t: gpr.nlml(Z, Y, Hyperparameters.from_log(t), nuggets)

    def objective(t):
        hp = Hyperparameters.from_log(t)
        value = gpr.nlml(Z, Y, hp, nuggets)
        m, d = _posterior(W, chi, nuggets, hp, Wc)
        return value + penalty_nn(m, config.penalty_nn) + penalty_mono(d, config.penalty_mono)

    return objective


def train_damage_model(W, chi, config: ConstraintConfig = ConstraintConfig(),
                       nugget: float = DAMAGE_NUGGET, restarts: int = gpr.DEFAULT_RESTARTS,
                       seed: int = gpr.DEFAULT_SEED) -> DamageModel:
    """Augment, then fit chi(W) under the penalised objective."""
    W = np.asarray(W, float).reshape(-1)
    chi = np.asarray(chi, float).reshape(-1)
    if W.size < 3:
        raise TooFewPoints("damage regression needs at least 3 points")
    if np.ptp(W) == 0:
        raise EmptyDataset("all W identical; length scale is unidentifiable")
    Wa, chia, w_peak = augment_failure_points(W, chi, config)
    nuggets = np.full(Wa.size, float(nugget))
    Wc = config.points(w_peak)
    objective = penalized_objective(Wa, chia, nuggets, config, Wc)
    starts = gpr.restart_points(gpr.default_init(Wa[:, None], chia[:, None]), restarts, seed)
    theta, value = gpr.minimize_log_objective(objective, starts)
    gp = GprModel(Wa[:, None], chia[:, None], Hyperparameters.from_log(theta), nuggets,
                  nlml_value=gpr.nlml(Wa[:, None], chia[:, None], Hyperparameters.from_log(theta), nuggets))
    model = DamageModel(gp, w_peak, config)
    model._flag()
    if model.constraint_violation:
        log.warning("damage model violates constraints: %s", model.residuals())
    return model
