import math

import numpy as np
import pytest
from scipy.linalg import expm

from slowlind.model import (LabelingError, LindbladModel, ModelError, OperatorPath, SmoothSchedule,
                            builtin_models, check_hypotheses, flat_start_bump, load_sampled_path,
                            match_labels, model_from_config, rotated_qubit_path, smooth_switch,
                            spectral_frame, write_sampled_path)
from slowlind.operators import InvalidInputError
from slowlind.asymptotics import splitting_matrix

from conftest import GRID, SX, SY, SZ


def test_smooth_switch_values():
    assert smooth_switch(0.0) == 0.0
    assert smooth_switch(1.0) == 1.0
    assert smooth_switch(0.5) == pytest.approx(0.5, abs=1e-15)
    with pytest.raises(InvalidInputError):
        smooth_switch(1.5)


@pytest.mark.parametrize("fn", [smooth_switch, flat_start_bump])
def test_flat_start(fn):
    # the derivative at t = 1e-3 is of size exp(-1000); differences at two steps agree
    for h in (1e-4, 5e-5):
        d = (fn(1e-3 + h) - fn(1e-3 - h)) / (2 * h)
        assert abs(d) <= 1e-8


def test_flat_start_bump_schedule():
    s = SmoothSchedule("flat-start-bump")
    vals = np.array([s(t) for t in np.linspace(0, 1, 101)])
    assert vals[0] == 0.0 and vals[-1] == pytest.approx(1.0)
    assert np.all(np.diff(vals) >= 0)
    # non-flat end: chi'(1) = 2
    h = 1e-5
    assert (s(1 + h) - s(1 - h)) / (2 * h) == pytest.approx(2.0, rel=1e-6)


def test_polynomial_and_sampled_schedules():
    p = SmoothSchedule("polynomial", coeffs=[0.0, 0.0, 1.0])
    assert p(0.5) == pytest.approx(0.25)
    assert p(2.0) == pytest.approx(1.0)
    t = np.linspace(0, 1, 21)
    u = SmoothSchedule("user-sampled", times=t, values=t ** 2)
    assert u(0.37) == pytest.approx(0.37 ** 2, abs=1e-6)
    with pytest.raises(ModelError):
        SmoothSchedule("user-sampled")
    with pytest.raises(ModelError):
        SmoothSchedule("zigzag")


def test_operator_path_derivative():
    H = OperatorPath(lambda t: math.sin(t) * SX + t ** 2 * SZ, 2, hermitian=True)
    for t in (0.2, 0.7):
        assert np.allclose(H.derivative(t), math.cos(t) * SX + 2 * t * SZ, atol=1e-9)
        assert H.richardson_error(t) < 1e-8


def test_theta_sx_derivative():
    H = OperatorPath.affine(np.zeros((2, 2)), SX, smooth_switch, hermitian=True)
    t, h = 0.4, 1e-5
    dtheta = (smooth_switch(t + h) - smooth_switch(t - h)) / (2 * h)
    assert np.allclose(H.derivative(t), dtheta * SX, atol=1e-7)


def test_constant_sigma_z_frame():
    frame = spectral_frame(OperatorPath.constant(SZ), np.linspace(0, 1, 11))
    for t in (0.0, 0.33, 1.0):
        ev, P = frame.at(t)
        assert set(np.round(ev, 12)) == {1.0, -1.0}
        for e, Pj in zip(ev, P):
            assert np.allclose(Pj, (np.eye(2) + e * SZ) / 2)
    assert np.allclose(frame.gaps, 2.0)


def test_rotated_qubit_frame():
    theta = lambda t: 0.5 * math.pi * smooth_switch(min(max(t, 0.0), 1.0))
    H = rotated_qubit_path(theta)
    frame = spectral_frame(H, GRID)
    for t in (0.0, 0.3, 0.75, 1.0):
        R = expm(-0.5j * theta(t) * SY)
        ev, P = frame.at(t)
        assert np.allclose(ev, [1.0, -1.0])
        assert np.allclose(P[0], R @ np.diag([1, 0]) @ R.conj().T, atol=1e-12)
    assert np.allclose(frame.gaps, 2.0)


def test_random_hermitian_resolution(rng):
    X = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    frame = spectral_frame(OperatorPath.constant(X + X.conj().T), [0.0])
    _, P = frame.at(0.0)
    assert np.allclose(sum(P), np.eye(3), atol=1e-12)
    for j in range(3):
        for k in range(3):
            assert np.allclose(P[j] @ P[k], P[j] if j == k else 0, atol=1e-12)


def test_projector_derivative_matches_differences(random_d3_frame):
    fr = random_d3_frame
    t = 0.55
    analytic = fr.projector_derivatives(t)
    fd = fr.projector_derivatives(t, h=1e-3)
    assert np.abs(analytic - fd).max() < 1e-7


def test_match_labels_ambiguous():
    P = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
    assert list(match_labels(P, P[::-1])) == [1, 0]
    v = np.array([1.0, 1.0]) / math.sqrt(2)
    Q = [np.outer(v, v), np.eye(2) - np.outer(v, v)]
    with pytest.raises(LabelingError):
        match_labels(P, Q)


@pytest.mark.parametrize("name", ["qubit-sx", "qubit-twist", "qubit-lowering", "qubit-pump"])
def test_qubit_models_pass_hypotheses(name):
    rep = check_hypotheses(builtin_models(name))
    assert rep.reg_flat_start and rep.spec_gap and rep.gen and rep.split, rep.as_dict()


def test_degenerate_hamiltonian_fails_gen():
    m = LindbladModel("flat", OperatorPath.constant(np.eye(2)), [OperatorPath.constant(SX)])
    assert not check_hypotheses(m).gen
    ladder = LindbladModel("ladder", OperatorPath.constant(np.diag([-1.0, 0.0, 1.0])),
                           [OperatorPath.constant(np.ones((3, 3)))])
    rep = check_hypotheses(ladder)
    assert rep.spec_gap and not rep.gen


def test_dephasing_fails_split():
    m = builtin_models("qubit-dephasing")
    rep = check_hypotheses(m)
    assert rep.gen and not rep.split
    assert np.abs(splitting_matrix(m, 0.6).matrix).max() < 1e-12


def test_symmetry_condition(qubit_sx_frame):
    for name, symmetric in (("qubit-sx", True), ("qubit-lowering", False)):
        m = builtin_models(name)
        fr = spectral_frame(m.hamiltonian, GRID)
        L = splitting_matrix(m, 0.4, fr).matrix
        assert (abs(L[0, 1] - L[1, 0]) < 1e-12) == symmetric


def test_random_model_is_deterministic():
    a, b = builtin_models("random-d3"), builtin_models("random-d3")
    for t in (0.0, 0.5, 1.0):
        assert a.H(t).tobytes() == b.H(t).tobytes()
        assert all(x.tobytes() == y.tobytes() for x, y in zip(a.jump_ops(t), b.jump_ops(t)))
    assert not np.allclose(builtin_models("random-d3", seed=8).H(0.0), a.H(0.0))


def test_builtin_errors():
    with pytest.raises(ModelError):
        builtin_models("qubit-xyz")
    with pytest.raises(ModelError):
        builtin_models("qubit-sx", colour=3)
    with pytest.raises(ModelError):
        builtin_models("qubit-pump", jump_frame="lab")


def test_model_from_config_matches_builtin_shape():
    cfg = {"dim": 2, "hamiltonian": {"h0": [[1, 0], [0, -1]], "h1": [[0, 1], [1, 0]]},
           "jumps": [{"g0": [[0, 1], [0, 0]]}]}
    m = model_from_config(cfg)
    assert m.dim == 2 and len(m.jumps) == 1
    assert np.allclose(m.H(1.0), SZ + SX)
    with pytest.raises(ModelError):
        model_from_config({"dim": 3, "hamiltonian": {"h0": [[1, 0], [0, -1]]}})
    assert model_from_config({"builtin": "qubit-sx"}).name == "qubit-sx"


def test_sampled_path_roundtrip(tmp_path, qubit_sx):
    times = np.linspace(0, 1, 41)
    path = tmp_path / "h.csv"
    write_sampled_path(path, times, [qubit_sx.H(t) for t in times])
    H = load_sampled_path(path, hermitian=True)
    assert np.allclose(H(0.5), qubit_sx.H(0.5), atol=1e-5)
