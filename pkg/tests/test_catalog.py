import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from tsgp import catalog
from tsgp import tensors as tk
from tsgp.errors import ConfigError, DomainError, GentDomainViolation

from conftest import random_spd

LAWS = [
    catalog.NoDamage(),
    catalog.VolokhReduced(0.8),
    catalog.VolokhUniversal(0.75, 10.0),
    catalog.VolokhUniversal(1.2, 2.0),
    catalog.TwoBranchLimiter(0.75, 10.0, 1.1, 4.0, 0.3),
]
ISO = [catalog.NeoHookean(0.7), catalog.MooneyRivlin(1.0, 0.5), catalog.Yeoh(1.73, -0.55),
       catalog.Gent(1.2, 30.0), catalog.GentGent(1.2, 30.0, 0.4)]
VOL = [catalog.SimoMiehe(100.0), catalog.VolNeoHookean(50.0), catalog.VolOgden(20.0, 2.5)]


def quad_gamma(s, x):
    v, _ = integrate.quad(lambda t: t ** (s - 1) * math.exp(-t), x, np.inf, epsabs=0, epsrel=1e-13, limit=200)
    return v


def test_incomplete_gamma_closed_forms():
    for x in (0.0, 0.3, 2.0, 15.0):
        assert catalog.upper_incomplete_gamma(1.0, x) == pytest.approx(math.exp(-x), rel=1e-13)
    assert catalog.upper_incomplete_gamma(0.5, 0.0) == pytest.approx(math.sqrt(math.pi), rel=1e-14)


def test_incomplete_gamma_quadrature_point():
    assert catalog.upper_incomplete_gamma(0.1, 1.0) == pytest.approx(quad_gamma(0.1, 1.0), rel=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 5.0), st.floats(0.01, 30.0))
def test_incomplete_gamma_vs_quadrature(s, x):
    assert catalog.upper_incomplete_gamma(s, x) == pytest.approx(quad_gamma(s, x), rel=1e-10)


def test_incomplete_gamma_domain():
    with pytest.raises(DomainError):
        catalog.upper_incomplete_gamma(0.0, 1.0)
    with pytest.raises(DomainError):
        catalog.upper_incomplete_gamma(1.0, -1.0)


def test_response_function_values():
    g1, g2 = catalog.MooneyRivlin(1.0, 0.5).gammas(3.2, 3.1)
    assert (g1, g2) == pytest.approx((5.2, -1.0))
    assert catalog.SimoMiehe(100.0).zeta(1.0) == 0.0
    assert catalog.Yeoh(0.7, 0.0).gammas(3.4, 3.3) == pytest.approx(catalog.NeoHookean(0.7).gammas(3.4, 3.3))
    yg = catalog.Yeoh(1.73, -0.55).gammas(3.4, 3.3)[0]
    assert yg == pytest.approx(2 * 1.73 + 4 * -0.55 * 0.4)


def test_gent_domain():
    with pytest.raises(GentDomainViolation):
        catalog.Gent(1.0, 2.0).gammas(5.5, 3.0)


def test_damage_law_values():
    u = catalog.VolokhUniversal(0.75, 10.0)
    assert u.chi(0.0) == 1.0
    assert u.chi(0.75) == pytest.approx(math.exp(-1))
    cu = catalog.TwoBranchLimiter(0.75, 10.0, 2.0, 3.0, 1.0)
    W = np.linspace(0, 1.5, 7)
    assert np.allclose(cu.chi(W), u.chi(W)) and np.allclose(cu.psi(W), u.psi(W))
    with pytest.raises(ConfigError):
        catalog.VolokhUniversal(0.75, 0.5)


@pytest.mark.parametrize("law", LAWS, ids=lambda l: type(l).__name__)
def test_psi_vanishes_at_zero(law):
    assert float(law.psi(0.0)) == 0.0


def test_universal_psi_saturates():
    u = catalog.VolokhUniversal(0.75, 10.0)
    psi_f = 0.075 * math.gamma(0.1)
    assert u.failure_energy() == pytest.approx(psi_f, rel=1e-13)
    assert float(u.psi(5.0)) == pytest.approx(psi_f, rel=1e-12)


@pytest.mark.parametrize("law", LAWS, ids=lambda l: type(l).__name__)
@settings(max_examples=25, deadline=None)
@given(W=st.floats(0.01, 2.0))
def test_chi_is_derivative_of_psi(law, W):
    h = 1e-5
    fd = (float(law.psi(W + h)) - float(law.psi(W - h))) / (2 * h)
    assert fd == pytest.approx(float(law.chi(W)), abs=1e-6)


@pytest.mark.parametrize("vol", VOL, ids=lambda v: type(v).__name__)
@pytest.mark.parametrize("iso", ISO, ids=lambda v: type(v).__name__)
def test_stress_is_energy_gradient(vol, iso):
    rng = np.random.default_rng(4)
    C = random_spd(rng, 0.15)
    W = lambda C: catalog.intact_energy(vol, iso, tk.invariants(C))
    S = catalog.intact_stress(vol, iso, C)
    fd = np.zeros((3, 3))
    h = 1e-6
    for i in range(3):
        for j in range(i, 3):
            E = np.zeros((3, 3))
            E[i, j] = E[j, i] = h
            d = (W(C + E) - W(C - E)) / (2 * h)
            fd[i, j] = fd[j, i] = d if i == j else d / 2
    assert np.allclose(S, 2 * fd, rtol=1e-6, atol=1e-6 * np.abs(S).max())


def test_path_end_points():
    params, Cs = catalog.generate_path(catalog.DeformationPath.tension())
    assert np.array_equal(Cs[0], np.eye(3))
    e = 1.5 ** -0.98
    assert np.allclose(Cs[-1], np.diag([2.25, e, e]), rtol=1e-14)
    C = catalog.right_cauchy_green("shear", 0.8)
    assert np.allclose(C, [[1, 0.8, 0], [0.8, 1.64, 0], [0, 0, 1]], rtol=1e-15)
    _, Cs = catalog.generate_path(catalog.DeformationPath("incompressible_uniaxial", 1.0, 2.0, 21))
    assert all(abs(np.linalg.det(C) - 1.0) < 1e-14 for C in Cs)


def test_path_validation():
    with pytest.raises(ConfigError):
        catalog.DeformationPath.tension(nu=0.6)
    with pytest.raises(ConfigError):
        catalog.DeformationPath("twist", 0, 1, 5)


def _explicit_stress(lam, nu=0.49, kappa=100.0, A10=1.0, A01=0.5, Phi=0.75, m=10.0):
    """Direct transcription of the damaged Mooney-Rivlin / Simo-Miehe response."""
    a = lam ** (-2 * nu)
    C = np.diag([lam * lam, a, a])
    J = math.sqrt(np.prod(np.diag(C)))
    Ci = np.linalg.inv(C)
    Cb = J ** (-2 / 3) * C
    I1 = np.trace(Cb)
    I2 = 0.5 * (I1 ** 2 - np.trace(Cb @ Cb))
    W = kappa / 2 * ((J * J - 1) / 2 - math.log(J)) + A10 * (I1 - 3) + A01 * (I2 - 3)
    chi = math.exp(-(W / Phi) ** m)
    G2 = np.eye(3) - np.trace(C) / 3 * Ci
    G3 = Cb - np.trace(Cb @ C) / 3 * Ci
    S = kappa / 2 * (J * J - 1) * Ci + J ** (-2 / 3) * (2 * (A10 + I1 * A01) * G2 - 2 * A01 * G3)
    return chi * S


def test_generated_dataset_matches_explicit_form(tension_data):
    for lam, S in zip(tension_data.params, tension_data.S):
        assert np.allclose(S, _explicit_stress(lam), rtol=1e-12, atol=1e-12)
    assert not tension_data.S[0].any()
    s11 = tension_data.S[:, 0, 0]
    peak = tension_data.params[np.argmax(s11)]
    assert 1.35 <= peak <= 1.45 and s11[-1] < s11.max()


def test_models_from_config_errors():
    with pytest.raises(ConfigError):
        catalog.models_from_config({"isochoric": {"type": "Nope"}, "path": {"mode": "tension", "start": 1,
                                                                             "stop": 1.5, "n_points": 3}})
    with pytest.raises(ConfigError):
        catalog.models_from_config({"path": {}})
