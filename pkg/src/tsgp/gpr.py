"""Zero-mean Gaussian-process regression with a Matern-5/2 kernel.

Outputs may have several columns; all columns share one Gram matrix and one
pair of hyperparameters, and the negative log marginal likelihood is summed
over columns.  Hyperparameters are optimised in log space with L-BFGS and
central finite-difference gradients.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import cho_solve, solve_triangular
from scipy.optimize import minimize
from scipy.spatial.distance import cdist

from .errors import NotPositiveDefinite, OptimizationFailed

log = logging.getLogger(__name__)

SQRT5 = np.sqrt(5.0)
LOG2PI = np.log(2.0 * np.pi)
FD_STEP = 1e-6
DEFAULT_RESTARTS = 5
DEFAULT_SEED = 42
# returned instead of +inf when the Gram matrix cannot be factorised
_BAD_OBJECTIVE = 1e25


@dataclass(frozen=True)
class Hyperparameters:
    signal_variance: float
    length_scale: float

    def __post_init__(self):
        if not (self.signal_variance > 0 and self.length_scale > 0):
            raise ValueError("hyperparameters must be strictly positive")

    @property
    def log_params(self) -> np.ndarray:
        """(log sigma_f, log ell), the optimiser's coordinates."""
        return np.array([0.5 * np.log(self.signal_variance), np.log(self.length_scale)])

    @classmethod
    def from_log(cls, theta) -> "Hyperparameters":
        return cls(float(np.exp(2.0 * theta[0])), float(np.exp(theta[1])))


def matern52(r, hp: Hyperparameters):
    a = SQRT5 * np.asarray(r, dtype=float) / hp.length_scale
    return hp.signal_variance * (1.0 + a + a * a / 3.0) * np.exp(-a)


def kernel(z, zp, hp: Hyperparameters) -> float:
    """Matern-5/2 covariance between two input vectors (no nugget)."""
    r = np.linalg.norm(np.atleast_1d(np.asarray(z, float)) - np.atleast_1d(np.asarray(zp, float)))
    return float(matern52(r, hp))


def _as_2d(Z) -> np.ndarray:
    Z = np.asarray(Z, dtype=float)
    return Z[:, None] if Z.ndim == 1 else Z


def cross_cov(Z1, Z2, hp: Hyperparameters) -> np.ndarray:
    return matern52(cdist(_as_2d(Z1), _as_2d(Z2)), hp)


def cholesky(K: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor with a single jitter escalation."""
    try:
        return np.linalg.cholesky(K)
    except np.linalg.LinAlgError:
        pass
    n = K.shape[0]
    jitter = 1e-10 * np.trace(K) / n
    try:
        return np.linalg.cholesky(K + jitter * np.eye(n))
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"Gram matrix not positive definite (jitter {jitter:.3g})") from exc


def gram(Z, hp: Hyperparameters, nuggets):
    """Return (K, L) with K = k(Z, Z) + diag(nuggets) and L its Cholesky factor."""
    Z = _as_2d(Z)
    nuggets = np.broadcast_to(np.asarray(nuggets, dtype=float), (Z.shape[0],))
    K = cross_cov(Z, Z, hp)
    K[np.diag_indices_from(K)] += nuggets
    return K, cholesky(K)


def nlml(Z, Y, hp: Hyperparameters, nuggets) -> float:
    """Negative log marginal likelihood summed over output columns."""
    Y = _as_2d(Y)
    n, d_out = Y.shape
    _, L = gram(Z, hp, nuggets)
    A = cho_solve((L, True), Y)
    logdet = 2.0 * np.sum(np.log(np.diag(L)))
    return float(0.5 * np.sum(Y * A) + 0.5 * d_out * logdet + 0.5 * n * d_out * LOG2PI)


def fd_gradient(fun: Callable[[np.ndarray], float], theta, step: float = FD_STEP) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    g = np.empty_like(theta)
    for i in range(theta.size):
        e = np.zeros_like(theta)
        e[i] = step
        g[i] = (fun(theta + e) - fun(theta - e)) / (2.0 * step)
    return g


@dataclass
class GprModel:
    """Trained regressor; the Cholesky factor is rebuilt from the data on construction."""

    inputs: np.ndarray
    outputs: np.ndarray
    hyperparameters: Hyperparameters
    nuggets: np.ndarray
    nlml_value: float = float("nan")
    _L: np.ndarray = field(init=False, repr=False)
    _alpha: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.inputs = _as_2d(self.inputs).copy()
        self.outputs = _as_2d(self.outputs).copy()
        self.nuggets = np.broadcast_to(np.asarray(self.nuggets, float), (self.inputs.shape[0],)).copy()
        _, self._L = gram(self.inputs, self.hyperparameters, self.nuggets)
        self._alpha = cho_solve((self._L, True), self.outputs)

    @property
    def n(self) -> int:
        return self.inputs.shape[0]

    @property
    def d_in(self) -> int:
        return self.inputs.shape[1]

    @property
    def d_out(self) -> int:
        return self.outputs.shape[1]

    @property
    def weights(self) -> np.ndarray:
        """K^-1 Y."""
        return self._alpha

    def predict(self, Zs, return_var: bool = False):
        """Posterior mean (and clamped variance) at query inputs ``Zs``.

        ``Zs`` is (q, d_in); a 1-D array is read as q scalar inputs when
        ``d_in == 1`` and as one query point otherwise.
        """
        Zs = np.asarray(Zs, dtype=float)
        if Zs.ndim == 1:
            Zs = Zs[:, None] if self.d_in == 1 else Zs[None, :]
        Ks = cross_cov(self.inputs, Zs, self.hyperparameters)
        mean = Ks.T @ self._alpha
        if not return_var:
            return mean
        v = solve_triangular(self._L, Ks, lower=True)
        var = self.hyperparameters.signal_variance - np.sum(v * v, axis=0)
        return mean, np.maximum(var, 0.0)

    def predict_one(self, z):
        """Mean vector and variance at one query point."""
        mean, var = self.predict(np.atleast_1d(np.asarray(z, float))[None, :], return_var=True)
        return mean[0], float(var[0])

    def to_dict(self) -> dict:
        return {
            "kernel": "matern52",
            "inputs": self.inputs.tolist(),
            "outputs": self.outputs.tolist(),
            "log_hyperparameters": self.hyperparameters.log_params.tolist(),
            "nuggets": self.nuggets.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GprModel":
        if d.get("kernel", "matern52") != "matern52":
            raise ValueError(f"unsupported kernel {d.get('kernel')!r}")
        return cls(
            inputs=np.asarray(d["inputs"], float),
            outputs=np.asarray(d["outputs"], float),
            hyperparameters=Hyperparameters.from_log(d["log_hyperparameters"]),
            nuggets=np.asarray(d["nuggets"], float),
        )


def default_init(Z, Y) -> Hyperparameters:
    """sigma_f = std(Y) (max |Y| for constant outputs), ell = median pairwise input distance."""
    Z, Y = _as_2d(Z), _as_2d(Y)
    sf = float(np.std(Y))
    scale = float(np.max(np.abs(Y))) if Y.size else 0.0
    # a (numerically) constant output has no spread; start from its magnitude
    if not sf > 1e-8 * scale:
        sf = scale or 1.0
    d = cdist(Z, Z)[np.triu_indices(Z.shape[0], k=1)]
    d = d[d > 0]
    ell = float(np.median(d)) if d.size else 1.0
    return Hyperparameters(sf * sf, ell)


def restart_points(init: Hyperparameters, restarts: int, seed: int) -> list:
    """First start at ``init``; the rest perturbed log-uniformly in x[0.1, 10]."""
    rng = np.random.default_rng(seed)
    base = init.log_params
    starts = [base]
    for _ in range(max(restarts, 1) - 1):
        starts.append(base + rng.uniform(np.log(0.1), np.log(10.0), size=2))
    return starts


def minimize_log_objective(objective: Callable[[np.ndarray], float], starts: Sequence[np.ndarray],
                           bounds=None):
    """Multi-start L-BFGS in log space; returns (theta, value) of the best run.

    ``bounds`` is an optional per-coordinate list of (lo, hi) pairs (None for
    open ends); starts are clipped into it.  Ties resolve to the lower restart
    index so results stay deterministic.
    """

    def safe(theta):
        if not np.all(np.isfinite(theta)) or np.any(np.abs(theta) > 50):
            return _BAD_OBJECTIVE
        try:
            v = objective(theta)
        except (NotPositiveDefinite, FloatingPointError):
            return _BAD_OBJECTIVE
        return v if np.isfinite(v) else _BAD_OBJECTIVE

    best = None
    for idx, x0 in enumerate(starts):
        x0 = _clip(np.asarray(x0, float), bounds)
        f0 = safe(x0)
        if f0 >= _BAD_OBJECTIVE:
            log.debug("restart %d: objective undefined at start", idx)
            continue
        res = minimize(safe, x0, jac=lambda t: fd_gradient(safe, t), method="L-BFGS-B",
                       bounds=bounds, options={"maxiter": 500, "ftol": 1e-13, "gtol": 1e-9})
        theta, val = (res.x, float(res.fun)) if res.fun <= f0 else (np.asarray(x0), f0)
        log.debug("restart %d: f=%.10g theta=%s", idx, val, theta)
        if best is None or val < best[1]:
            best = (np.asarray(theta, float), val)
    if best is None:
        raise OptimizationFailed("every restart failed at its initial point")
    return best


def _clip(theta, bounds):
    if bounds is None:
        return theta
    lo = np.array([-np.inf if b[0] is None else b[0] for b in bounds])
    hi = np.array([np.inf if b[1] is None else b[1] for b in bounds])
    return np.clip(theta, lo, hi)


def input_span(Z) -> float:
    """Largest pairwise distance between training inputs."""
    Z = _as_2d(Z)
    return float(np.max(cdist(Z, Z))) if Z.shape[0] > 1 else 0.0


def optimize(Z, Y, nuggets, init: Optional[Hyperparameters] = None,
             restarts: int = DEFAULT_RESTARTS, seed: int = DEFAULT_SEED,
             min_length_scale: Optional[float] = None, fit_columns=None) -> GprModel:
    """Fit hyperparameters by minimising the NLML and return the trained model.

    ``min_length_scale`` bounds the search from below; the default leaves the
    length scale free.  ``fit_columns`` (index or boolean mask) restricts the
    likelihood to some output columns; the model still predicts all of them.
    """
    Z, Y = _as_2d(Z), _as_2d(Y)
    Yfit = Y if fit_columns is None else Y[:, fit_columns]
    if Yfit.shape[1] == 0:
        Yfit = Y
    nuggets = np.broadcast_to(np.asarray(nuggets, float), (Z.shape[0],)).copy()
    if init is None:
        init = default_init(Z, Yfit)
    bounds = None
    if min_length_scale is not None and min_length_scale > 0:
        bounds = [(None, None), (float(np.log(min_length_scale)), None)]
    theta, val = minimize_log_objective(
        lambda t: nlml(Z, Yfit, Hyperparameters.from_log(t), nuggets),
        restart_points(init, restarts, seed),
        bounds=bounds,
    )
    return GprModel(Z, Y, Hyperparameters.from_log(theta), nuggets, nlml_value=val)


def predict(model: GprModel, z):
    """Functional form of :meth:`GprModel.predict_one`."""
    return model.predict_one(z)
