"""Stage I: intact response functions and the two elasticity regressors.

Under uniaxial loading the columns for Dev(I) and Dev(Cbar) are parallel, so
the 9x3 system has rank 2 and only the combination Gamma1*G2 + Gamma2*G3 is
identified.  In that case the Dev(Cbar) column is dropped (Gamma2 = 0) and the
reduced system is solved; the stress is still reconstructed exactly.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import lstsq

from . import gpr
from . import tensors as tk
from .catalog import incompressible_basis
from .dataset import Dataset, is_reference
from .errors import CutoffOutOfRange, NotIsochoric, RankDeficient, TooFewPoints

log = logging.getLogger(__name__)

RANK_RTOL = 1e-10
ISOCHORIC_TOL = 1e-8
# Stage-I length scales are kept above this multiple of the training-input span.
# The likelihood is nearly flat in ell for the volumetric data, and a short
# length scale makes the zero-mean regressor revert to zero just past the
# intact range, which is exactly where Stage II needs it.
LENGTH_SCALE_FLOOR = 10.0


@dataclass(frozen=True)
class ResponseFunctionSample:
    J: float
    I1bar: float
    I2bar: float
    zeta: float
    gamma1: float
    gamma2: float


@dataclass(frozen=True)
class NuggetPolicy:
    """Per-model nugget: ``reference`` at the C = I point, ``default`` elsewhere."""

    reference: float
    default: float

    def schedule(self, n: int, reference_index: Optional[int] = 0) -> np.ndarray:
        a = np.full(n, float(self.default))
        if reference_index is not None:
            a[reference_index] = self.reference
        return a

    def to_dict(self):
        return {"reference": self.reference, "default": self.default}


# nugget values used for the synthetic benchmark
VOL_NUGGETS = NuggetPolicy(1e-5, 1e-2)
ISO_NUGGETS = NuggetPolicy(1.0, 1.0)


def apply_cutoff(data: Dataset, cutoff: float) -> Dataset:
    """Keep the prefix of states no farther from the reference than ``cutoff``."""
    lo, hi = np.min(data.params), np.max(data.params)
    span = hi - lo
    if not (lo - 1e-12 * max(span, 1.0) <= cutoff <= hi + 1e-12 * max(span, 1.0)):
        raise CutoffOutOfRange(f"cutoff {cutoff} outside [{lo}, {hi}]")
    ref = data.params[0]
    dist = np.abs(data.params - ref)
    keep = dist <= abs(cutoff - ref) * (1 + 1e-12) + 1e-15
    keep[0] = True
    return data.subset(np.flatnonzero(keep))


def _rank(A) -> int:
    sv = np.linalg.svd(A, compute_uv=False)
    return int(np.sum(sv > RANK_RTOL * sv[0])) if sv.size and sv[0] > 0 else 0


def _solve(A, b):
    """Least squares by orthogonal factorisation; returns (x, rank).

    When the last column is dependent on the others it is dropped and its
    coefficient set to zero.
    """
    rank = _rank(A)
    k = A.shape[1]
    x = np.zeros(k)
    cols = k if rank == k else k - 1
    if cols > 0:
        x[:cols] = lstsq(A[:, :cols], b, lapack_driver="gelsy")[0]
    return x, rank


def extract_response_functions(C, S) -> ResponseFunctionSample:
    """Least-squares (zeta, Gamma1, Gamma2) reproducing an intact stress state."""
    inv = tk.invariants(C)
    if is_reference(C):
        return ResponseFunctionSample(inv.J, inv.I1bar, inv.I2bar, 0.0, 0.0, 0.0)
    G1, G2, G3 = tk.tensor_basis(C)
    s = inv.J ** (-2.0 / 3.0)
    A = np.column_stack([tk.vectorize(G1), s * tk.vectorize(G2), s * tk.vectorize(G3)])
    x, rank = _solve(A, tk.vectorize(S))
    if rank < 2:
        raise RankDeficient(f"tensor basis has rank {rank} at C = {C.tolist()}")
    return ResponseFunctionSample(inv.J, inv.I1bar, inv.I2bar, *map(float, x))


def extract_decoupled(C, S_vol, S_iso) -> ResponseFunctionSample:
    """Volumetric and isochoric parts solved as two separate systems."""
    inv = tk.invariants(C)
    if is_reference(C):
        return ResponseFunctionSample(inv.J, inv.I1bar, inv.I2bar, 0.0, 0.0, 0.0)
    G1, G2, G3 = tk.tensor_basis(C)
    s = inv.J ** (-2.0 / 3.0)
    zeta, _ = _solve(tk.vectorize(G1)[:, None], tk.vectorize(S_vol))
    g, _ = _solve(np.column_stack([s * tk.vectorize(G2), s * tk.vectorize(G3)]),
                           tk.vectorize(S_iso))
    return ResponseFunctionSample(inv.J, inv.I1bar, inv.I2bar, float(zeta[0]), float(g[0]), float(g[1]))


def extract_response_functions_incompressible(C, S):
    """(Gamma1, Gamma2) from the pressure-eliminated uniaxial representation."""
    C = np.asarray(C, float)
    d = tk.det3(C)
    if abs(d - 1.0) > ISOCHORIC_TOL:
        raise NotIsochoric(f"det C = {d!r} differs from 1")
    if is_reference(C):
        return 0.0, 0.0
    G1 = tk.inv3(C)
    assert G1[1, 1] != 0.0
    H2, H3 = incompressible_basis(C)
    A = np.column_stack([tk.vectorize(H2), tk.vectorize(H3)])
    x, rank = _solve(A, tk.vectorize(S))
    if rank < 1:
        raise RankDeficient("incompressible basis vanished")
    return float(x[0]), float(x[1])


@dataclass
class Stage1Result:
    m_vol: Optional[gpr.GprModel]
    m_iso: gpr.GprModel
    samples: list
    intact: Dataset


def response_samples(data: Dataset) -> list:
    if data.incompressible:
        out = []
        for C, S in zip(data.C, data.S):
            inv = tk.invariants(C)
            g1, g2 = extract_response_functions_incompressible(C, S)
            out.append(ResponseFunctionSample(inv.J, inv.I1bar, inv.I2bar, 0.0, g1, g2))
        return out
    return [extract_response_functions(C, S) for C, S in zip(data.C, data.S)]


def train_stage1(data: Dataset, cutoff: float, vol_nuggets: NuggetPolicy = VOL_NUGGETS,
                 iso_nuggets: NuggetPolicy = ISO_NUGGETS, restarts: int = gpr.DEFAULT_RESTARTS,
                 seed: int = gpr.DEFAULT_SEED,
                 length_scale_floor: Optional[float] = LENGTH_SCALE_FLOOR) -> Stage1Result:
    """Fit M_vol (J -> zeta; compressible only) and M_iso ((I1bar, I2bar) -> Gammas).

    ``length_scale_floor`` is a multiple of each model's input span; None
    leaves the length scales unbounded.
    """

    def fit(Z, Y, nuggets):
        floor = None if not length_scale_floor else length_scale_floor * gpr.input_span(Z)
        # an output that is zero throughout (Gamma2 on uniaxial paths) is left
        # out of the likelihood so it cannot shrink the signal variance
        return gpr.optimize(Z, Y, nuggets, restarts=restarts, seed=seed, min_length_scale=floor,
                            fit_columns=np.any(Y != 0.0, axis=0))

    intact = apply_cutoff(data, cutoff)
    if len(intact) < 4:
        raise TooFewPoints(f"intact subset has {len(intact) - 1} states beyond the reference; need 3")
    samples = response_samples(intact)
    n = len(samples)
    m_vol = None
    if not data.incompressible:
        Zv = np.array([[s.J] for s in samples])
        Yv = np.array([[s.zeta] for s in samples])
        m_vol = fit(Zv, Yv, vol_nuggets.schedule(n))
    # Dev(I) and Dev(Cbar) vanish at C = I, so the reference pair carries no
    # stress information for M_iso; its zero targets would only drag the
    # isochoric functions towards 0 next to the origin.
    iso = samples[1:]
    Zi = np.array([[s.I1bar, s.I2bar] for s in iso])
    Yi = np.array([[s.gamma1, s.gamma2] for s in iso])
    m_iso = fit(Zi, Yi, iso_nuggets.schedule(n - 1, reference_index=None))
    log.info("stage I: %d intact states, vol=%s iso=%s", n,
             None if m_vol is None else m_vol.hyperparameters, m_iso.hyperparameters)
    return Stage1Result(m_vol, m_iso, samples, intact)
