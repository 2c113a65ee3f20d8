"""Closed-form constitutive catalog and synthetic ground-truth generation.

Volumetric energies give zeta(J) = J U'(J); isochoric energies give the pair
(Gamma1, Gamma2); damage laws give chi(W) = dpsi/dW and psi(W).  Together with
the deformation-path generators they produce reference datasets with known
answers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import tensors as tk
from .dataset import Dataset
from .errors import ConfigError, DomainError, GentDomainViolation


# ---------------------------------------------------------------------------
# upper incomplete gamma
# ---------------------------------------------------------------------------

_EPS = 1e-16
_TINY = 1e-300
_MAXITER = 10_000


def _lower_gamma_series(s: float, x: float) -> float:
    term = 1.0 / s
    total = term
    ap = s
    for _ in range(_MAXITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + s * math.log(x))


def _upper_gamma_cf(s: float, x: float) -> float:
    # modified Lentz evaluation of the Legendre continued fraction
    b = x + 1.0 - s
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAXITER):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-x + s * math.log(x)) * h


def upper_incomplete_gamma(s: float, x: float) -> float:
    """Non-regularised upper incomplete gamma, integral of t^(s-1) e^-t over [x, inf)."""
    if not s > 0:
        raise DomainError(f"s must be > 0, got {s!r}")
    if not x >= 0:
        raise DomainError(f"x must be >= 0, got {x!r}")
    if x == 0.0:
        return math.gamma(s)
    if x < s + 1.0:
        return math.gamma(s) - _lower_gamma_series(s, x)
    return _upper_gamma_cf(s, x)


# ---------------------------------------------------------------------------
# volumetric models (zeta = J dU/dJ)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SimoMiehe:
    kappa: float

    def energy(self, J):
        return self.kappa / 2 * ((J * J - 1) / 2 - np.log(J))

    def zeta(self, J):
        return self.kappa / 2 * (J * J - 1)


@dataclass(frozen=True)
class VolNeoHookean:
    kappa: float

    def energy(self, J):
        return self.kappa / 2 * (J - 1) ** 2

    def zeta(self, J):
        return self.kappa * J * (J - 1)


@dataclass(frozen=True)
class VolOgden:
    kappa: float
    beta: float

    def __post_init__(self):
        if self.beta == 0:
            raise ConfigError("volumetric Ogden requires beta != 0")

    def energy(self, J):
        b = self.beta
        return self.kappa / b**2 * (J ** (-b) - 1 + b * np.log(J))

    def zeta(self, J):
        return self.kappa / self.beta * (1 - J ** (-self.beta))


# ---------------------------------------------------------------------------
# isochoric models (Gamma1, Gamma2)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NeoHookean:
    A10: float

    def energy(self, I1, I2):
        return self.A10 * (I1 - 3)

    def gammas(self, I1, I2):
        return 2 * self.A10 + 0 * I1, 0 * I1


@dataclass(frozen=True)
class MooneyRivlin:
    A10: float
    A01: float

    def energy(self, I1, I2):
        return self.A10 * (I1 - 3) + self.A01 * (I2 - 3)

    def gammas(self, I1, I2):
        return 2 * (self.A10 + I1 * self.A01), -2 * self.A01 + 0 * I1


@dataclass(frozen=True)
class Yeoh:
    C1: float
    C2: float

    def energy(self, I1, I2):
        return self.C1 * (I1 - 3) + self.C2 * (I1 - 3) ** 2

    def gammas(self, I1, I2):
        return 2 * self.C1 + 4 * self.C2 * (I1 - 3), 0 * I1


def _gent_guard(I1, Jm):
    if np.any(np.asarray(I1) - 3 >= Jm):
        raise GentDomainViolation(f"I1bar - 3 must stay below Jm = {Jm}")


@dataclass(frozen=True)
class Gent:
    mu: float
    Jm: float

    def energy(self, I1, I2):
        _gent_guard(I1, self.Jm)
        return -self.mu * self.Jm / 2 * np.log(1 - (I1 - 3) / self.Jm)

    def gammas(self, I1, I2):
        _gent_guard(I1, self.Jm)
        return self.mu / (1 - (I1 - 3) / self.Jm), 0 * I1


@dataclass(frozen=True)
class GentGent:
    mu: float
    Jm: float
    C2: float

    def energy(self, I1, I2):
        _gent_guard(I1, self.Jm)
        return (-self.mu * self.Jm / 2 * np.log(1 - (I1 - 3) / self.Jm)
                + 1.5 * self.C2 * np.log(I2 / 3))

    def gammas(self, I1, I2):
        _gent_guard(I1, self.Jm)
        g1 = self.mu / (1 - (I1 - 3) / self.Jm) + 3 * self.C2 * I1 / I2
        return g1, -3 * self.C2 / I2


# ---------------------------------------------------------------------------
# damage laws (chi = dpsi/dW)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NoDamage:
    def chi(self, W):
        return 1.0 + 0 * np.asarray(W, float)

    def psi(self, W):
        return np.asarray(W, float) * 1.0

    def failure_energy(self):
        return math.inf


@dataclass(frozen=True)
class VolokhReduced:
    Phi: float

    def chi(self, W):
        return np.exp(-np.asarray(W, float) / self.Phi)

    def psi(self, W):
        return self.Phi - self.Phi * np.exp(-np.asarray(W, float) / self.Phi)

    def failure_energy(self):
        return self.Phi


def _universal_psi(W, Phi, m):
    s = 1.0 / m
    W = np.asarray(W, float)
    upper = np.vectorize(lambda w: upper_incomplete_gamma(s, (w / Phi) ** m))(W)
    return Phi / m * (math.gamma(s) - upper)


@dataclass(frozen=True)
class VolokhUniversal:
    Phi: float
    m: float

    def __post_init__(self):
        if not (self.Phi > 0 and self.m >= 1):
            raise ConfigError("universal law requires Phi > 0 and m >= 1")

    def chi(self, W):
        return np.exp(-(np.asarray(W, float) / self.Phi) ** self.m)

    def psi(self, W):
        return _universal_psi(W, self.Phi, self.m)

    def failure_energy(self):
        return self.Phi / self.m * upper_incomplete_gamma(1.0 / self.m, 0.0)


@dataclass(frozen=True)
class TwoBranchLimiter:
    """Two-branch limiter; ``beta`` is a constant weight in [0, 1]."""

    Phi_plus: float
    m_plus: float
    Phi_minus: float
    m_minus: float
    beta: float

    def __post_init__(self):
        if not 0 <= self.beta <= 1:
            raise ConfigError("beta must lie in [0, 1]")

    def chi(self, W):
        W = np.asarray(W, float)
        return (self.beta * np.exp(-(W / self.Phi_plus) ** self.m_plus)
                + (1 - self.beta) * np.exp(-(W / self.Phi_minus) ** self.m_minus))

    def psi(self, W):
        return (self.beta * _universal_psi(W, self.Phi_plus, self.m_plus)
                + (1 - self.beta) * _universal_psi(W, self.Phi_minus, self.m_minus))

    def failure_energy(self):
        return (self.beta * VolokhUniversal(self.Phi_plus, self.m_plus).failure_energy()
                + (1 - self.beta) * VolokhUniversal(self.Phi_minus, self.m_minus).failure_energy())


VOLUMETRIC = {"SimoMiehe": SimoMiehe, "VolNeoHookean": VolNeoHookean, "VolOgden": VolOgden}
ISOCHORIC = {"NeoHookean": NeoHookean, "MooneyRivlin": MooneyRivlin, "Yeoh": Yeoh,
             "Gent": Gent, "GentGent": GentGent}
DAMAGE = {"None": NoDamage, "VolokhReduced": VolokhReduced, "VolokhUniversal": VolokhUniversal,
          "TwoBranchLimiter": TwoBranchLimiter}


def response_functions(vol, iso, inv: tk.Invariants):
    """(zeta, Gamma1, Gamma2) at the given invariants; zeta is 0 when ``vol`` is None."""
    zeta = 0.0 if vol is None else float(vol.zeta(inv.J))
    g1, g2 = iso.gammas(inv.I1bar, inv.I2bar)
    return zeta, float(g1), float(g2)


def stress_reduction(law, W: float) -> float:
    return float(law.chi(W))


def total_energy(law, W: float) -> float:
    return float(law.psi(W))


def intact_energy(vol, iso, inv: tk.Invariants) -> float:
    U = 0.0 if vol is None else float(vol.energy(inv.J))
    return U + float(iso.energy(inv.I1bar, inv.I2bar))


# ---------------------------------------------------------------------------
# deformation paths
# ---------------------------------------------------------------------------

PATH_MODES = ("tension", "compression", "shear", "incompressible_uniaxial")


@dataclass(frozen=True)
class DeformationPath:
    mode: str
    start: float
    stop: float
    n_points: int
    nu: float = 0.49

    def __post_init__(self):
        if self.mode not in PATH_MODES:
            raise ConfigError(f"unknown path mode {self.mode!r}")
        if self.n_points < 2:
            raise ConfigError("n_points must be >= 2")
        if not 0 <= self.nu < 0.5:
            raise ConfigError(f"Poisson ratio must lie in [0, 0.5), got {self.nu}")
        if self.mode != "shear" and not (self.start > 0 and self.stop > 0):
            raise ConfigError("stretches must be positive")

    @property
    def parameters(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.n_points)

    @property
    def incompressible(self) -> bool:
        return self.mode == "incompressible_uniaxial"

    @classmethod
    def tension(cls, start=1.0, stop=1.5, n_points=51, nu=0.49):
        return cls("tension", start, stop, n_points, nu)

    @classmethod
    def compression(cls, start=1.0, stop=0.5, n_points=51, nu=0.49):
        return cls("compression", start, stop, n_points, nu)

    @classmethod
    def shear(cls, start=0.0, stop=0.8, n_points=51):
        return cls("shear", start, stop, n_points, 0.0)


def deformation_gradient(mode: str, p: float, nu: float = 0.49) -> np.ndarray:
    if mode in ("tension", "compression"):
        return np.diag([p, p ** (-nu), p ** (-nu)])
    if mode == "incompressible_uniaxial":
        return np.diag([p, p ** -0.5, p ** -0.5])
    if mode == "shear":
        F = np.eye(3)
        F[0, 1] = p
        return F
    raise ConfigError(f"unknown path mode {mode!r}")


def right_cauchy_green(mode: str, p: float, nu: float = 0.49) -> np.ndarray:
    if mode in ("tension", "compression"):
        return np.diag([p * p, p ** (-2 * nu), p ** (-2 * nu)])
    if mode == "incompressible_uniaxial":
        # built from the principal stretches so that det C = 1 holds to rounding
        return np.diag([p * p, 1.0 / p, 1.0 / p])
    F = deformation_gradient(mode, p, nu)
    return tk.sym(F.T @ F)


def generate_path(path: DeformationPath):
    """Return (parameters, C) with C of shape (n, 3, 3)."""
    params = path.parameters
    Cs = np.stack([right_cauchy_green(path.mode, p, path.nu) for p in params])
    return params, Cs


# ---------------------------------------------------------------------------
# ground-truth stress
# ---------------------------------------------------------------------------

def incompressible_basis(C):
    """Basis pair of the pressure-eliminated uniaxial representation."""
    G1, G2, G3 = tk.tensor_basis(C)
    H2 = tk.sym(G2 - G2[1, 1] / G1[1, 1] * G1)
    H3 = tk.sym(G3 - G3[1, 1] / G1[1, 1] * G1)
    return H2, H3


def intact_stress(vol, iso, C, incompressible: bool = False) -> np.ndarray:
    inv = tk.invariants(C)
    zeta, g1, g2 = response_functions(vol, iso, inv)
    if incompressible:
        H2, H3 = incompressible_basis(C)
        return g1 * H2 + g2 * H3
    G1, G2, G3 = tk.tensor_basis(C)
    s = inv.J ** (-2.0 / 3.0)
    return tk.sym(zeta * G1 + s * g1 * G2 + s * g2 * G3)


def generate_dataset(vol, iso, law, path: DeformationPath) -> Dataset:
    """Closed-form stresses along ``path``; W from the analytic intact energy."""
    params, Cs = generate_path(path)
    incompressible = path.incompressible
    if incompressible:
        vol = None
    S = np.empty_like(Cs)
    W = np.empty(len(params))
    for i, C in enumerate(Cs):
        inv = tk.invariants(C)
        W[i] = intact_energy(vol, iso, inv)
        S[i] = float(law.chi(W[i])) * intact_stress(vol, iso, C, incompressible)
    mode = "custom" if path.mode == "incompressible_uniaxial" else path.mode
    return Dataset(params, Cs, S, mode=mode, incompressible=incompressible)


# ---------------------------------------------------------------------------
# config handling
# ---------------------------------------------------------------------------

def _build(table, entry: Optional[dict], what: str):
    if entry is None:
        return None
    entry = dict(entry)
    kind = entry.pop("type", None)
    if kind not in table:
        raise ConfigError(f"unknown {what} model {kind!r}; choose from {sorted(table)}")
    try:
        return table[kind](**entry)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {what} model {kind!r}: {exc}") from exc


def models_from_config(cfg: dict):
    """Instantiate (vol, iso, law, path) from a generator config mapping."""
    try:
        path_cfg = dict(cfg["path"])
        iso_cfg = cfg["isochoric"]
    except KeyError as exc:
        raise ConfigError(f"generator config missing {exc}") from exc
    vol = _build(VOLUMETRIC, cfg.get("volumetric"), "volumetric")
    iso = _build(ISOCHORIC, iso_cfg, "isochoric")
    law = _build(DAMAGE, cfg.get("damage", {"type": "None"}), "damage")
    try:
        path = DeformationPath(**path_cfg)
    except TypeError as exc:
        raise ConfigError(f"bad path config: {exc}") from exc
    return vol, iso, law, path


SYNTHETIC_BENCHMARK = {
    "volumetric": {"type": "SimoMiehe", "kappa": 100.0},
    "isochoric": {"type": "MooneyRivlin", "A10": 1.0, "A01": 0.5},
    "damage": {"type": "VolokhUniversal", "Phi": 0.75, "m": 10.0},
    "path": {"mode": "tension", "start": 1.0, "stop": 1.5, "n_points": 51, "nu": 0.49},
}


def benchmark_models():
    """Generator used for the synthetic benchmark: (vol, iso, law)."""
    vol, iso, law, _ = models_from_config(SYNTHETIC_BENCHMARK)
    return vol, iso, law


def ground_truth(path: DeformationPath, vol=None, iso=None, law=None) -> Dataset:
    if vol is None:
        vol, iso, law = benchmark_models()
    return generate_dataset(vol, iso, law, path)
