"""Symmetric second-order tensor algebra on 3x3 numpy arrays.

Deformation and stress tensors are carried as plain ``(3, 3)`` float arrays
that are symmetric by construction.  Fourth-order tensors are ``(3, 3, 3, 3)``
arrays.  ``vectorize`` flattens row-major to 9 components (shear entries
appear twice), which is the layout used by every least-squares system.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import NonPositiveDeterminant

# Voigt-like ordering of the six independent components.
VOIGT_INDEX = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))
VOIGT_LABELS = ("11", "22", "33", "12", "13", "23")

IDENTITY = np.eye(3)


class Invariants(NamedTuple):
    J: float
    I1bar: float
    I2bar: float


def sym(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    return 0.5 * (A + A.T)


def from_six(c) -> np.ndarray:
    """Build the full symmetric tensor from (11, 22, 33, 12, 13, 23)."""
    c11, c22, c33, c12, c13, c23 = (float(v) for v in c)
    return np.array([[c11, c12, c13], [c12, c22, c23], [c13, c23, c33]])


def to_six(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    return np.array([A[i, j] for i, j in VOIGT_INDEX])


def det3(A) -> float:
    a = A
    return float(
        a[0, 0] * (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
        - a[0, 1] * (a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0])
        + a[0, 2] * (a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0])
    )


def _checked_det(C) -> float:
    d = det3(C)
    if not d > 0.0:
        raise NonPositiveDeterminant(f"det C = {d!r} must be strictly positive")
    return d


def inv3(A) -> np.ndarray:
    """Closed-form inverse through the adjugate; result is symmetrised."""
    a = np.asarray(A, dtype=float)
    d = det3(a)
    if d == 0.0:
        raise NonPositiveDeterminant("singular tensor")
    adj = np.empty((3, 3))
    adj[0, 0] = a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1]
    adj[0, 1] = a[0, 2] * a[2, 1] - a[0, 1] * a[2, 2]
    adj[0, 2] = a[0, 1] * a[1, 2] - a[0, 2] * a[1, 1]
    adj[1, 0] = a[1, 2] * a[2, 0] - a[1, 0] * a[2, 2]
    adj[1, 1] = a[0, 0] * a[2, 2] - a[0, 2] * a[2, 0]
    adj[1, 2] = a[0, 2] * a[1, 0] - a[0, 0] * a[1, 2]
    adj[2, 0] = a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0]
    adj[2, 1] = a[0, 1] * a[2, 0] - a[0, 0] * a[2, 1]
    adj[2, 2] = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    return sym(adj / d)


def ddot(A, B) -> float:
    """Double contraction A:B."""
    return float(np.tensordot(A, B, axes=2))


def invariants(C) -> Invariants:
    d = _checked_det(C)
    J = np.sqrt(d)
    Cbar = J ** (-2.0 / 3.0) * np.asarray(C, dtype=float)
    tr = np.trace(Cbar)
    I2 = 0.5 * (tr * tr - ddot(Cbar, Cbar))
    return Invariants(float(J), float(tr), float(I2))


def deviatoric(A, C) -> np.ndarray:
    """Lagrangian deviator ``A - (A:C)/3 C^-1``."""
    _checked_det(C)
    Cinv = inv3(C)
    return sym(np.asarray(A, dtype=float) - ddot(A, C) / 3.0 * Cinv)


def tensor_basis(C):
    """Irreducible basis (C^-1, Dev I, Dev Cbar) of the isotropic stress."""
    d = _checked_det(C)
    C = np.asarray(C, dtype=float)
    Cinv = inv3(C)
    Cbar = d ** (-1.0 / 3.0) * C
    G2 = sym(IDENTITY - np.trace(C) / 3.0 * Cinv)
    G3 = sym(Cbar - ddot(Cbar, C) / 3.0 * Cinv)
    return Cinv, G2, G3


def vectorize(A) -> np.ndarray:
    return np.asarray(A, dtype=float).reshape(9).copy()


def devectorize(v) -> np.ndarray:
    return np.asarray(v, dtype=float).reshape(3, 3).copy()


def frobenius_norm(A) -> float:
    return float(np.sqrt(np.sum(np.square(A))))


# ---------------------------------------------------------------------------
# fourth-order helpers
# ---------------------------------------------------------------------------

def dyad(A, B) -> np.ndarray:
    """(A x B)_ijkl = A_ij B_kl."""
    return np.einsum("ij,kl->ijkl", A, B)


def odot(A, B) -> np.ndarray:
    """(A . B)_ijkl = (A_ik B_jl + A_il B_jk) / 2."""
    return 0.5 * (np.einsum("ik,jl->ijkl", A, B) + np.einsum("il,jk->ijkl", A, B))


def sym_identity4() -> np.ndarray:
    return odot(IDENTITY, IDENTITY)


def minor_symmetry_defect(T) -> float:
    """Largest relative departure from T_ijkl = T_jikl = T_ijlk."""
    scale = max(np.max(np.abs(T)), 1e-300)
    a = np.max(np.abs(T - T.transpose(1, 0, 2, 3)))
    b = np.max(np.abs(T - T.transpose(0, 1, 3, 2)))
    return float(max(a, b) / scale)


def push_forward(CC, F) -> np.ndarray:
    """Spatial tangent c_ijkl = J^-1 F_ip F_jq F_kr F_ls CC_pqrs."""
    F = np.asarray(F, dtype=float)
    J = det3(F)
    if not J > 0.0:
        raise NonPositiveDeterminant(f"det F = {J!r} must be strictly positive")
    return np.einsum("ip,jq,kr,ls,pqrs->ijkl", F, F, F, F, CC) / J


def rotation(axis, angle) -> np.ndarray:
    """Rodrigues rotation matrix about ``axis`` by ``angle`` radians."""
    k = np.asarray(axis, dtype=float)
    k = k / np.linalg.norm(k)
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return IDENTITY + np.sin(angle) * K + (1 - np.cos(angle)) * K @ K
