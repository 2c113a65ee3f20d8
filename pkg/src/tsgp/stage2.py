"""Stage II data: intact-stress predictions, intact energy, and chi extraction."""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import tensors as tk
from .catalog import incompressible_basis
from .dataset import Dataset, fmt, is_reference
from .errors import PathNotAnchored

log = logging.getLogger(__name__)

DEGENERATE_RTOL = 1e-12


def _basis_stack(Cs, incompressible):
    n = len(Cs)
    J = np.empty(n)
    I12 = np.empty((n, 2))
    B = np.empty((n, 3, 3, 3))
    for i, C in enumerate(Cs):
        inv = tk.invariants(C)
        J[i] = inv.J
        I12[i] = inv.I1bar, inv.I2bar
        G1, G2, G3 = tk.tensor_basis(C)
        if incompressible:
            H2, H3 = incompressible_basis(C)
            B[i] = np.zeros((3, 3)), H2, H3
        else:
            s = inv.J ** (-2.0 / 3.0)
            B[i] = G1, s * G2, s * G3
    return J, I12, B


def predict_response(m_vol, m_iso, Cs):
    """GPR response functions (zeta, Gamma1, Gamma2) for a stack of C."""
    Cs = np.asarray(Cs, float).reshape(-1, 3, 3)
    J = np.array([tk.invariants(C).J for C in Cs])
    inv = [tk.invariants(C) for C in Cs]
    I12 = np.array([[v.I1bar, v.I2bar] for v in inv])
    zeta = np.zeros(len(Cs)) if m_vol is None else m_vol.predict(J[:, None])[:, 0]
    g = m_iso.predict(I12)
    return np.column_stack([zeta, g[:, 0], g[:, 1]])


def predict_intact_path(m_vol, m_iso, Cs, incompressible: bool = False) -> np.ndarray:
    """Intact stress at every C in ``Cs`` (shape (n, 3, 3))."""
    Cs = np.asarray(Cs, float).reshape(-1, 3, 3)
    _, _, B = _basis_stack(Cs, incompressible)
    x = predict_response(m_vol, m_iso, Cs)
    S = np.einsum("nk,nkij->nij", x, B)
    return 0.5 * (S + S.transpose(0, 2, 1))


def predict_intact_stress(m_vol, m_iso, C, incompressible: bool = False) -> np.ndarray:
    return predict_intact_path(m_vol, m_iso, np.asarray(C)[None], incompressible)[0]


def integrate_energy(Cs, S, params=None, incompressible: bool = False) -> np.ndarray:
    """Cumulative trapezoidal intact energy along a path anchored at C = I.

    The tensor form accumulates S : dC / 2.  With ``incompressible`` the scalar
    uniaxial form accumulates S11 d(lambda) and needs the stretch ``params``.
    """
    Cs = np.asarray(Cs, float).reshape(-1, 3, 3)
    S = np.asarray(S, float).reshape(-1, 3, 3)
    if len(Cs) == 0 or not is_reference(Cs[0]):
        raise PathNotAnchored("energy integration must start at C = I")
    if incompressible:
        if params is None:
            params = np.sqrt(Cs[:, 0, 0])
        params = np.asarray(params, float)
        inc = 0.5 * (S[1:, 0, 0] + S[:-1, 0, 0]) * np.diff(params)
    else:
        dC = np.diff(Cs, axis=0)
        Sm = 0.5 * (S[1:] + S[:-1])
        inc = 0.5 * np.einsum("nij,nij->n", Sm, dC)
    return np.concatenate([[0.0], np.cumsum(inc)])


def extract_chi(S, S_intact) -> float:
    """Scalar least-squares factor chi with S ~ chi * S_intact (1 if both vanish)."""
    a = tk.vectorize(S_intact)
    b = tk.vectorize(S)
    aa = float(a @ a)
    if aa == 0.0:
        return 1.0 if float(b @ b) == 0.0 else float("inf")
    return float(a @ b) / aa


def chi_is_degenerate(S, S_intact) -> bool:
    ns = tk.frobenius_norm(S)
    return ns > 0 and tk.frobenius_norm(S_intact) < DEGENERATE_RTOL * ns


@dataclass
class EnergyTrace:
    params: np.ndarray
    W: np.ndarray
    chi: np.ndarray
    S_intact: np.ndarray
    degenerate: np.ndarray

    @property
    def w_peak(self) -> float:
        return float(np.max(self.W))

    def training_pairs(self):
        """(W, chi) for damage regression.

        The reference state is left out: chi is 0/0 there and the value 1 is
        only a convention, which would otherwise pin chi(0) and force a rise
        whenever the extracted chi sits slightly above 1 near the origin.
        Degenerate states are dropped as well.
        """
        keep = ~self.degenerate & (self.W > 0)
        keep[0] = False
        return self.W[keep], self.chi[keep]

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "parameter", "W", "chi"])
            for i, (p, W, c) in enumerate(zip(self.params, self.W, self.chi)):
                w.writerow([i, fmt(p), fmt(W), fmt(c)])


def build_stage2_dataset(data: Dataset, m_vol, m_iso) -> EnergyTrace:
    """Intact energy and chi at every state of ``data`` from Stage I models."""
    S_int = predict_intact_path(m_vol, m_iso, data.C, data.incompressible)
    W = integrate_energy(data.C, S_int, data.params, data.incompressible)
    chi = np.array([extract_chi(S, Si) for S, Si in zip(data.S, S_int)])
    degenerate = np.array([chi_is_degenerate(S, Si) for S, Si in zip(data.S, S_int)])
    # the reference state is undamaged by definition
    chi[0] = 1.0
    degenerate[0] = False
    if np.any(degenerate):
        log.warning("degenerate intact stress at %d states", int(np.sum(degenerate)))
    return EnergyTrace(data.params.copy(), W, chi, S_int, degenerate)
