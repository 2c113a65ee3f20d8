import numpy as np
import pytest

from tsgp import catalog, stage1, stage2
from tsgp import tensors as tk
from tsgp.errors import PathNotAnchored


@pytest.fixture(scope="module")
def s1(tension_data):
    return stage1.train_stage1(tension_data, 1.25)


def test_intact_prediction_reference_and_symmetry(s1):
    assert np.max(np.abs(stage2.predict_intact_stress(s1.m_vol, s1.m_iso, np.eye(3)))) <= 1e-4
    S = stage2.predict_intact_stress(s1.m_vol, s1.m_iso, catalog.right_cauchy_green("shear", 0.3))
    assert np.array_equal(S, S.T)


def test_intact_prediction_matches_truth_at_1_2(s1, synthetic_models):
    vol, iso, _ = synthetic_models
    C = catalog.right_cauchy_green("tension", 1.2)
    S = stage2.predict_intact_stress(s1.m_vol, s1.m_iso, C)
    truth = catalog.intact_stress(vol, iso, C)
    assert tk.frobenius_norm(S - truth) <= 0.02 * tk.frobenius_norm(truth)


def test_energy_integration(synthetic_models):
    vol, iso, _ = synthetic_models
    assert stage2.integrate_energy(np.eye(3)[None], np.zeros((1, 3, 3))).tolist() == [0.0]

    def W_at_end(n):
        _, Cs = catalog.generate_path(catalog.DeformationPath.tension(n_points=n))
        S = np.stack([catalog.intact_stress(vol, iso, C) for C in Cs])
        return stage2.integrate_energy(Cs, S)[-1]

    exact = catalog.intact_energy(vol, iso, tk.invariants(catalog.right_cauchy_green("tension", 1.5)))
    assert W_at_end(51) == pytest.approx(exact, rel=5e-3)
    assert W_at_end(501) == pytest.approx(W_at_end(51), rel=1e-3)
    with pytest.raises(PathNotAnchored):
        stage2.integrate_energy(np.diag([1.1, 1, 1])[None], np.zeros((1, 3, 3)))


def test_incompressible_energy_is_uniaxial_integral():
    iso = catalog.NeoHookean(0.6)
    path = catalog.DeformationPath("incompressible_uniaxial", 1.0, 1.5, 401)
    lam, Cs = catalog.generate_path(path)
    S = np.stack([catalog.intact_stress(None, iso, C, True) for C in Cs])
    W = stage2.integrate_energy(Cs, S, lam, incompressible=True)
    expect = np.trapezoid(S[:, 0, 0], lam) if hasattr(np, "trapezoid") else np.trapz(S[:, 0, 0], lam)
    assert W[-1] == pytest.approx(expect, rel=1e-12)


def test_extract_chi_cases():
    S = np.diag([1.0, 2.0, 3.0])
    assert stage2.extract_chi(S, S) == 1.0
    assert stage2.extract_chi(np.zeros((3, 3)), S) == 0.0
    assert stage2.extract_chi(np.zeros((3, 3)), np.zeros((3, 3))) == 1.0


def test_chi_trace_on_synthetic_data(s1, tension_data, synthetic_models):
    vol, iso, law = synthetic_models
    trace = stage2.build_stage2_dataset(tension_data, s1.m_vol, s1.m_iso)
    assert len(trace.W) == 51
    near = tension_data.params <= 1.25
    assert np.all((trace.chi[near] >= 0.9) & (trace.chi[near] <= 1.1))
    assert trace.chi[-1] < 0.2
    i = int(np.argmin(np.abs(tension_data.params - 1.45)))
    assert trace.chi[i] == pytest.approx(float(law.chi(trace.W[i])), abs=0.05)
    W, chi = trace.training_pairs()
    assert len(W) == 50 and np.all(W > 0)


def test_trace_is_order_invariant(s1, tension_data):
    perm = np.random.default_rng(0).permutation(len(tension_data))
    from tsgp.dataset import Dataset
    shuffled = Dataset(tension_data.params[perm], tension_data.C[perm], tension_data.S[perm], "tension")
    a = stage2.build_stage2_dataset(tension_data, s1.m_vol, s1.m_iso)
    b = stage2.build_stage2_dataset(shuffled, s1.m_vol, s1.m_iso)
    assert np.array_equal(a.W, b.W) and np.array_equal(a.chi, b.chi)
