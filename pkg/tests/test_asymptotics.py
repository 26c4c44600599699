import math

import numpy as np
import pytest
from scipy.integrate import quad_vec
from scipy.linalg import expm

from slowlind.asymptotics import (InvariantError, LindbladSpectralFrame, dyson_terms,
                                  hamiltonian_adiabatic_transition, markov_generator,
                                  perturbative_transition, reduced_dynamics, slow_drive_approx,
                                  splitting_matrix, splitting_matrix_from_projectors,
                                  stationary_state, transition_regime_approx)
from slowlind.experiments import fit_rate
from slowlind.model import LindbladModel, OperatorPath, builtin_models, flat_start_bump, spectral_frame
from slowlind.operators import (apply_superop, induced_trace_norm, is_cptp, random_density_matrix,
                                trace_norm, vec)
from slowlind.propagators import kato_W, lindblad_U, schrodinger_U

from conftest import GRID, SX, SZ


def _frame(m):
    return spectral_frame(m.hamiltonian, GRID)


# -- Dyson expansion -----------------------------------------------------------------

def test_dyson_zero_coupling(qubit_sx):
    ds = dyson_terms(qubit_sx, 0.1, 0.0, 1.0, 2)
    U = schrodinger_U(qubit_sx, 0.1, [0.0, 1.0]).final
    assert all(np.abs(T).max() == 0 for T in ds.terms)
    assert np.abs(ds.base - np.kron(U.conj(), U)).max() < 1e-9
    with pytest.raises(ValueError):
        dyson_terms(qubit_sx, 0.1, 0.01, 1.0, 5)


@pytest.mark.slow
def test_dyson_term_bounds_and_first_order(qubit_sx):
    pts = []
    for eps in (0.2, 0.1, 0.05):
        g = eps ** 2
        ds = dyson_terms(qubit_sx, eps, g, 1.0, 3)
        for n, T in enumerate(ds.terms, start=1):
            assert induced_trace_norm(T, 50) <= ds.bound(n) * (1 + 1e-9)
        U = lindblad_U(qubit_sx, eps, g, [0.0, 1.0]).final
        assert np.linalg.norm(U - ds.partial_sum(), 2) <= 2 * ds.remainder_bound
        D1 = ds.terms[0]
        pts.append((g / eps, np.linalg.norm(U - ds.base - D1) / np.linalg.norm(D1)))
    # the first term captures U - U0 up to relative O(g/eps); slope tends to 1 from below
    assert abs(fit_rate(pts).exponent - 1.0) <= 0.1


@pytest.mark.slow
def test_diagonal_dyson_against_reduced_generator(random_d3, random_d3_frame):
    """Population blocks of D_n/(g/eps)^n approach the iterated integrals of L~."""
    fr, t = random_d3_frame, 1.0
    Lt = lambda s: splitting_matrix(random_d3, s, fr).matrix
    I1 = quad_vec(Lt, 0, t, epsabs=1e-12)[0]
    I2 = quad_vec(lambda s: Lt(s) @ quad_vec(Lt, 0, s, epsabs=1e-12)[0], 0, t, epsabs=1e-10)[0]
    P0, Pt = fr.at(0.0)[1], fr.at(t)[1]
    res = {1: [], 2: []}
    for eps in (0.1, 0.05, 0.025):
        ds = dyson_terms(random_d3, eps, eps, t, 2)
        for n, ref in ((1, I1), (2, I2)):
            D = ds.terms[n - 1] / (ds.g / eps) ** n
            B = np.array([[np.vdot(vec(Pt[k]), D @ vec(P0[j])).real for j in range(3)] for k in range(3)])
            res[n].append((eps, np.abs(B - ref).max()))
    for n in (1, 2):
        errs = [e for _, e in res[n]]
        assert errs[0] > errs[1] > errs[2]
        # O(eps): the first halving is faster, the asymptotic local slope is 1
        assert fit_rate(res[n]).exponent >= 0.8


# -- perturbative and Hamiltonian transition formulas ------------------------------------

def test_perturbative_dephasing_and_zero_coupling():
    m = builtin_models("qubit-dephasing")
    f = perturbative_transition(m, 0.1, 0.01, 1.0, 0, 1)
    assert abs(f.dissipator_term) <= 1e-12
    sx = builtin_models("qubit-sx")
    f0 = perturbative_transition(sx, 0.1, 0.0, 1.0, 0, 1)
    assert f0.dissipator_term == 0.0
    assert f0.total == f0.hamiltonian_term > 0


@pytest.mark.parametrize("t", [0.5, 1.0])
def test_perturbative_dissipator_term_qubit_sx(qubit_sx, qubit_sx_frame, t):
    eps, g = 0.1, 1e-3
    f = perturbative_transition(qubit_sx, eps, g, t, 0, 1, frame=qubit_sx_frame)
    assert f.dissipator_term == pytest.approx((g / eps) * t, rel=1e-6)
    assert f.dissipator_term >= 0


def test_perturbative_rejects_bad_state(qubit_sx):
    with pytest.raises(ValueError):
        perturbative_transition(qubit_sx, 0.1, 0.01, 1.0, 0, 1, rho_j=np.eye(2) / 2)


def test_hamiltonian_transition_constant_h():
    m = LindbladModel("c", OperatorPath.constant(SZ))
    h = hamiltonian_adiabatic_transition(m, 0.1, 0.7, 0, 1)
    assert h.population == 0.0
    assert all(np.abs(c).max() == 0 for c in h.coherences.values())


def _transition_residuals(name, t=0.5):
    m = builtin_models(name)
    fr = _frame(m)
    pop, coh, coh_res = [], [], []
    rho = fr.at(0.0)[1][0]
    for eps in (0.2, 0.14, 0.1, 0.07, 0.05):
        U = schrodinger_U(m, eps, [0.0, t]).final
        out = U @ rho @ U.conj().T
        P = fr.at(t)[1]
        h = hamiltonian_adiabatic_transition(m, eps, t, 0, 1, frame=fr)
        pop.append((eps, abs(np.trace(P[1] @ out).real - h.population)))
        c = P[0] @ out @ P[1]
        coh.append((eps, trace_norm(c)))
        coh_res.append((eps, trace_norm(c - h.coherences[(0, 1)])))
    return fit_rate(pop), fit_rate(coh), fit_rate(coh_res)


def test_hamiltonian_transition_rates():
    pop, coh, coh_res = _transition_residuals("qubit-twist")
    assert abs(pop.exponent - 3.0) <= 0.3
    assert abs(coh.exponent - 1.0) <= 0.2
    assert coh_res.exponent >= 1.8
    # planar paths cancel the next order as well
    assert _transition_residuals("qubit-sx")[0].exponent >= 2.7


# -- splitting matrix and stationary states ---------------------------------------------------

def test_splitting_identity_jump(rng):
    X = rng.normal(size=(3, 3))
    _, V = np.linalg.eigh(X + X.T)
    P = [np.outer(V[:, j], V[:, j]) for j in range(3)]
    assert np.abs(splitting_matrix_from_projectors(P, [np.eye(3)])).max() < 1e-14


@pytest.mark.parametrize("t", [0.0, 0.3, 1.0])
def test_splitting_qubit_models(t):
    sx = splitting_matrix(builtin_models("qubit-sx"), t)
    assert np.allclose(sx.matrix, [[-1, 1], [1, -1]], atol=1e-12)
    lo = splitting_matrix(builtin_models("qubit-lowering"), t)
    assert np.allclose(lo.matrix, [[0, 1], [0, -1]], atol=1e-12)


def test_splitting_lab_frame_rate_varies():
    m = builtin_models("qubit-sx", jump_frame="lab")
    for t in (0.0, 0.5, 1.0):
        # a lab-fixed sx couples the eigenvectors with gamma(t) = cos^2 of the Bloch angle
        angle = 0.5 * math.pi * flat_start_bump(t)
        assert splitting_matrix(m, t).matrix[0, 1] == pytest.approx(math.cos(angle) ** 2, abs=1e-12)


def test_splitting_eigendata(random_d3):
    sm = splitting_matrix(random_d3, 0.4)
    d = 3
    assert sm.eigenvalues[0] == 0
    assert np.abs(sm.column_sums).max() <= 1e-12
    for i in range(d):
        nu, mu = sm.right[:, i], sm.left[:, i]
        assert np.vdot(mu, nu) == pytest.approx(1.0)
        assert np.vdot(mu, mu).real == pytest.approx(d)
        assert np.linalg.norm(sm.matrix @ nu - sm.eigenvalues[i] * nu) < 1e-10


def test_stationary_states():
    nu, c = stationary_state(splitting_matrix(builtin_models("qubit-sx"), 0.6))
    assert np.allclose(nu, np.eye(2) / 2, atol=1e-12)
    m = builtin_models("qubit-lowering")
    fr = _frame(m)
    nu, c = stationary_state(splitting_matrix(m, 0.6, fr))
    assert np.allclose(nu, fr.at(0.6)[1][0], atol=1e-12)
    assert np.trace(nu).real == pytest.approx(1.0)
    with pytest.raises(InvariantError):
        stationary_state(splitting_matrix(builtin_models("qubit-dephasing"), 0.5))


def test_stationary_state_is_fixed_point(random_d3):
    sm = splitting_matrix(random_d3, 0.7)
    nu, c = stationary_state(sm)
    assert np.trace(nu).real == pytest.approx(1.0)
    assert np.min(c) >= -1e-10
    lam = np.min(np.abs(sm.eigenvalues[1:].real))
    tau = 50 / lam
    x0 = np.array([1.0, 0.0, 0.0])
    assert np.abs(expm(tau * sm.matrix) @ x0 - c).max() <= 1e-8


# -- reduced dynamics and Markov export -------------------------------------------------------

def test_reduced_dynamics_closed_form(qubit_sx):
    times = np.linspace(0, 1, 11)
    for delta in (0.3, 1.0, 4.0):
        red = reduced_dynamics(qubit_sx, delta, times)
        assert np.allclose(red.pop[0], np.eye(2))
        for t, M in zip(times, red.pop):
            f = math.exp(-2 * t / delta)
            ref = 0.5 * np.ones((2, 2)) + f * 0.5 * np.array([[1, -1], [-1, 1]])
            assert np.abs(M - ref).max() < 1e-9
    red = reduced_dynamics(qubit_sx, 1.0, [0.0, 1.0])
    assert red.pop[-1][0, 0] - red.pop[-1][0, 1] == pytest.approx(math.exp(-2), abs=1e-10)


def test_reduced_dynamics_composed_is_cptp(random_d3, random_d3_frame):
    fr = random_d3_frame
    times = np.linspace(0, 1, 6)
    red = reduced_dynamics(random_d3, 0.5, times, fr)
    W = kato_W(fr, times)
    P0 = fr.at(0.0)[1]
    for i in range(len(times)):
        assert is_cptp(red.composed(i, W.mats[i], P0), 1e-7)
    with pytest.raises(ValueError):
        reduced_dynamics(random_d3, 0.0)


def test_markov_matches_reduced_dynamics(random_d3, random_d3_frame):
    times = np.linspace(0, 1, 201)
    mk = markov_generator(random_d3, times, random_d3_frame)
    assert mk.max_row_sum() <= 1e-12
    assert mk.min_offdiag() >= -1e-12
    P = mk.transition_matrices(1.0, substeps=40)
    red = reduced_dynamics(random_d3, 1.0, times, random_d3_frame)
    assert np.abs(P[-1] - red.pop[-1].T).max() <= 1e-6


def test_markov_qubit_sx_and_no_dissipator(qubit_sx):
    mk = markov_generator(qubit_sx, np.linspace(0, 1, 5))
    for Q in mk.rates:
        assert np.allclose(Q, Q.T) and np.allclose(Q, [[-1, 1], [1, -1]])
    bare = LindbladModel("bare", qubit_sx.hamiltonian)
    mk0 = markov_generator(bare, np.linspace(0, 1, 5))
    assert np.all(mk0.rates == 0)
    assert np.allclose(mk0.transition_matrices()[-1], np.eye(2))


# -- Lindbladian spectra and slow-drive approximant ---------------------------------------------

def test_lindblad_spectrum_qubit_sx(qubit_sx):
    g = 0.01
    lf = LindbladSpectralFrame(qubit_sx, g, [0.25, 0.5])
    sp = lf.at(0.5)
    L = qubit_sx.lindbladian(0.5, g)
    assert sp.eigenvalues[0] == 0
    assert sp.eigenvalues[1] == pytest.approx(-2 * g, abs=g ** 2)
    assert np.linalg.norm(L @ sp.right[:, 0]) <= 1e-9
    assert np.max(np.linalg.eigvals(L).real) <= 1e-9
    total = sum(sp.projector(i) for i in range(4))
    assert np.abs(total - np.eye(4)).max() <= 1e-8


def test_zero_group_projector_tends_to_pinching(random_d3, random_d3_frame):
    from slowlind.operators import pinching_superop
    P0 = pinching_superop(random_d3_frame.at(0.5)[1])
    devs = []
    for g in (0.02, 0.01):
        sp = LindbladSpectralFrame(random_d3, g, [0.5], random_d3_frame).at(0.5)
        devs.append(np.linalg.norm(sp.zero_group_projector() - P0, 2))
    assert devs[1] < devs[0]
    assert devs[0] / devs[1] == pytest.approx(2.0, rel=0.2)


def test_slow_drive_constant_lindbladian():
    m = LindbladModel("c", OperatorPath.constant(SZ), [OperatorPath.constant(0.5 * SX)])
    times = np.linspace(0, 1, 6)
    eps, g = 0.3, 0.2
    V = slow_drive_approx(m, eps, g, times)
    assert np.allclose(V.at(0.0), np.eye(4), atol=1e-12)
    L = m.lindbladian(0.0, g)
    for t, X in zip(times, V.mats):
        assert np.abs(X - expm(t * L / eps)).max() < 1e-8


@pytest.mark.slow
def test_slow_drive_rate_fixed_g():
    m = builtin_models("qubit-lowering")
    g = 0.2
    grid = np.linspace(0, 1, 41)
    lf = LindbladSpectralFrame(m, g, grid)
    pts = []
    for eps in (0.04, 0.028, 0.02, 0.014, 0.01):
        V = slow_drive_approx(m, eps, g, grid, lf)
        U = lindblad_U(m, eps, g, grid)
        pts.append((eps, max(induced_trace_norm(U.mats[i] - V.mats[i], 50) for i in range(0, 41, 10))))
    assert abs(fit_rate(pts).exponent - 1.0) <= 0.2


def test_transition_approx_has_no_coherences(qubit_sx, qubit_sx_frame, rng):
    times = np.linspace(0, 1, 11)
    A = transition_regime_approx(qubit_sx, 0.05, 0.05, times, qubit_sx_frame)
    rho = random_density_matrix(2, rng)
    for t, S in zip(times, A.mats):
        out = apply_superop(S, rho)
        P = qubit_sx_frame.at(t)[1]
        assert np.abs(P[0] @ out @ P[1]).max() < 1e-9
    # depends on eps and g only through eps / g
    B = transition_regime_approx(qubit_sx, 0.1, 0.1, times, qubit_sx_frame)
    assert np.abs(A.final - B.final).max() < 1e-9
