import json

import numpy as np
import pytest

from slowlind.operators import (ContractViolation, InvalidInputError, apply_superop, choi_matrix,
                                commutator_superop, hs_inner, induced_trace_norm, is_cptp,
                                lindblad_superop, operator_from_json, operator_to_json,
                                pinching_superop, random_density_matrix, superop_from_action,
                                trace_deficit, trace_norm, unvec, vec)

from conftest import SX, SY, SZ


def test_vec_is_column_stacking():
    A = np.array([[1, 2], [3, 4]], dtype=complex)
    assert np.allclose(vec(A), [1, 3, 2, 4])
    assert np.allclose(unvec(vec(A)), A)


@pytest.mark.parametrize("A, expected", [
    (np.eye(2), 2.0),
    (np.diag([1.0, -1.0]), 2.0),
    (np.array([[0.0, 2.0], [0.0, 0.0]]), 2.0),
])
def test_trace_norm_examples(A, expected):
    assert trace_norm(A) == pytest.approx(expected, abs=1e-12)


def test_trace_norm_matches_svd(rng):
    A = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    assert trace_norm(A) == pytest.approx(np.linalg.svd(A, compute_uv=False).sum(), rel=1e-12)


def test_trace_norm_rejects_nonfinite():
    with pytest.raises(InvalidInputError):
        trace_norm(np.array([[np.nan, 0], [0, 1]]))


def test_hs_inner():
    assert hs_inner(np.eye(2), np.eye(2)) == pytest.approx(2.0)
    assert abs(hs_inner(SX, SY)) < 1e-15
    P = np.array([[1, 0], [0, 0]], dtype=complex)
    assert hs_inner(P, P) == pytest.approx(1.0)
    with pytest.raises(InvalidInputError):
        hs_inner(np.eye(2), np.eye(3))


def test_superop_from_action_identity():
    assert np.allclose(superop_from_action(2, lambda A: A), np.eye(4))


def test_superop_from_action_commutator_spectrum():
    e1, e2 = 0.7, -1.3
    H = np.diag([e1, e2]).astype(complex)
    S = superop_from_action(2, lambda A: -1j * (H @ A - A @ H))
    ev = np.sort_complex(np.linalg.eigvals(S))
    expected = np.sort_complex(np.array([0, 0, -1j * (e1 - e2), -1j * (e2 - e1)]))
    assert np.allclose(ev, expected, atol=1e-12)
    assert np.allclose(S, commutator_superop(H))


def test_superop_from_action_left_multiplication():
    S = superop_from_action(2, lambda A: SZ @ A)
    # vec(sz A) = (I kron sz) vec(A)
    assert np.allclose(S, np.diag([1, -1, 1, -1]))


def test_superop_from_action_detects_nonlinearity():
    with pytest.raises(ContractViolation):
        superop_from_action(2, lambda A: A @ A)


def test_choi_identity_channel():
    C = choi_matrix(np.eye(4))
    w = np.linalg.eigvalsh(C)
    assert np.trace(C).real == pytest.approx(2.0)
    assert np.sum(w > 1e-12) == 1
    assert w[-1] == pytest.approx(2.0)


def test_choi_transpose_map():
    T = superop_from_action(2, lambda A: A.T)
    assert np.linalg.eigvalsh(choi_matrix(T))[0] == pytest.approx(-1.0)
    rep = is_cptp(T)
    assert not rep
    assert rep.min_choi_eig == pytest.approx(-1.0)


def test_choi_depolarizing():
    D = superop_from_action(2, lambda A: np.trace(A) * np.eye(2) / 2)
    assert np.allclose(choi_matrix(D), np.eye(4) / 2)
    assert is_cptp(D)


def test_pinching_is_cptp(rng):
    X = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    _, V = np.linalg.eigh(X + X.conj().T)
    P = [np.outer(V[:, j], V[:, j].conj()) for j in range(3)]
    assert is_cptp(pinching_superop(P))
    assert is_cptp(np.eye(9))


def test_lindblad_superop_is_trace_annihilating(rng):
    H = rng.normal(size=(3, 3))
    H = H + H.T
    G = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    L = lindblad_superop(H, [G], 0.3)
    assert np.abs(vec(np.eye(3)) @ L).max() < 1e-12


def test_trace_deficit_of_scaled_identity():
    assert trace_deficit(0.5 * np.eye(4)) == pytest.approx(0.5)


def test_induced_norm_of_channel_is_one(rng):
    D = superop_from_action(2, lambda A: np.trace(A) * np.eye(2) / 2)
    assert induced_trace_norm(D, n_states=20) == pytest.approx(1.0)
    assert induced_trace_norm(2 * np.eye(4), n_states=5) == pytest.approx(2.0)


def test_json_roundtrip(rng):
    A = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    obj = json.loads(json.dumps(operator_to_json(A)))
    assert np.array_equal(operator_from_json(obj), A)
    with pytest.raises(InvalidInputError):
        operator_from_json({"dim": 2, "entries": [[1, 0]]})


def test_apply_superop_matches_action(rng):
    rho = random_density_matrix(2, rng)
    S = superop_from_action(2, lambda A: SX @ A @ SX)
    assert np.allclose(apply_superop(S, rho), SX @ rho @ SX)
