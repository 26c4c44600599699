"""Closed-form and reduced approximants for the three coupling regimes.

Contents: Dyson terms of the weak-coupling expansion, the perturbative
transition formulas, the splitting matrix L~ of the zero eigenvalue and its
reduced dynamics, the associated Markov generator, the spectral data of the
full Lindbladian for small g, and the slow-drive and transition-regime
approximants built from them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson, simpson
from scipy.linalg import eig, expm, null_space
from scipy.optimize import linear_sum_assignment

from .model import LabelingError, LindbladModel, SpectralFrame, spectral_frame
from .operators import conj_superop, induced_trace_norm, pinching_superop, unvec, vec
from .propagators import (PropagatorTable, adiabatic_V, evolve, kato_W, schrodinger_U)


class InvariantError(ValueError):
    """A structural invariant (Markov property, kernel dimension, ...) is violated."""


def _frame(model: LindbladModel, frame: SpectralFrame | None, n: int = 201) -> SpectralFrame:
    if frame is None:
        frame = spectral_frame(model.hamiltonian, np.linspace(0.0, 1.0, n), model.gap_threshold)
    return frame


def _require_singletons(frame: SpectralFrame, *labels):
    ranks = frame.ranks
    for j in labels:
        if ranks[j] != 1:
            raise ValueError(f"spectral group {j} is not a singleton (rank {ranks[j]})")


def _odd_grid(t: float, n: int) -> np.ndarray:
    n = max(3, n + (n % 2 == 0))
    return np.linspace(0.0, t, n)


# -- Dyson expansion --------------------------------------------------------------------

@dataclass
class DysonTermSet:
    t: float
    eps: float
    g: float
    terms: list
    base: np.ndarray
    L1: float
    basis: str

    @property
    def order(self) -> int:
        return len(self.terms)

    def partial_sum(self, n: int | None = None) -> np.ndarray:
        n = self.order if n is None else n
        return self.base + sum(self.terms[:n], np.zeros_like(self.base))

    def bound(self, n: int) -> float:
        """((g/eps) L1 t)^n / n!."""
        return (self.g / self.eps * self.L1 * self.t) ** n / math.factorial(n)

    @property
    def remainder_bound(self) -> float:
        return self.bound(self.order + 1)


def dissipator_norm_bound(model: LindbladModel, grid) -> float:
    """Upper bound sup_s sum_l 2 ||Gamma_l(s)||^2 on the trace-norm of L^1_s."""
    return float(max(sum(2 * np.linalg.norm(G, 2) ** 2 for G in model.jump_ops(s)) for s in grid))


def _cumsimpson(y, x):
    """Cumulative Simpson along axis 0; scipy's routine silently drops imaginary parts."""
    re = cumulative_simpson(y.real, x=x, axis=0, initial=0)
    im = cumulative_simpson(y.imag, x=x, axis=0, initial=0)
    return re + 1j * im


def dyson_terms(model: LindbladModel, eps: float, g: float, t: float, N: int,
                basis: str = "exact", n_grid: int | None = None, frame=None,
                tol: float = 1e-7, max_doublings: int = 3) -> DysonTermSet:
    """Iterated integrals of U = U0 + sum_n D_n with D_n = (g/eps)^n int ... U0 L1 U0 ... L1 U0.

    ``basis='exact'`` uses U0 = U rho U*; ``basis='adiabatic'`` replaces U by
    the adiabatic propagator V.  Integrals are cumulative composite Simpson
    on a uniform grid, doubled until the relative change is at most ``tol``.
    """
    if not 0 <= N <= 4:
        raise ValueError("N must be in 0..4")
    if basis not in ("exact", "adiabatic"):
        raise ValueError("basis must be 'exact' or 'adiabatic'")
    if basis == "adiabatic":
        frame = _frame(model, frame)
    if n_grid is None:
        ev = np.linalg.eigvalsh(model.H(t))
        bohr = max(np.ptp(ev), 1e-12)
        n_grid = max(257, int(40 * t * bohr / (2 * np.pi * eps)))

    def compute(n):
        grid = _odd_grid(t, n)
        if basis == "exact":
            U = schrodinger_U(model, eps, grid, tol=1e-11).mats
        else:
            U = adiabatic_V(frame, eps, grid, tol=1e-11).mats
        fwd = np.array([conj_superop(X) for X in U])
        bwd = np.array([conj_superop(X.conj().T) for X in U])
        L1 = np.array([model.dissipator(s) for s in grid])
        terms, prev = [], fwd
        for _ in range(N):
            integrand = np.einsum("kab,kbc,kcd->kad", bwd, L1, prev)
            cum = _cumsimpson(integrand, grid)
            prev = (g / eps) * np.einsum("kab,kbc->kac", fwd, cum)
            terms.append(prev)
        return fwd[-1], [T[-1] for T in terms]

    base, terms = compute(n_grid)
    for _ in range(max_doublings):
        if not terms:
            break
        base2, terms2 = compute(2 * n_grid)
        change = max(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)
                     for a, b in zip(terms, terms2))
        base, terms, n_grid = base2, terms2, 2 * n_grid
        if change <= tol:
            break
    L1 = dissipator_norm_bound(model, np.linspace(0, t, 51)) if model.jumps else 0.0
    return DysonTermSet(t, eps, g, terms, base, L1, basis)


# -- perturbative transition formulas ------------------------------------------------------

@dataclass
class PerturbativeTransition:
    hamiltonian_term: float
    dissipator_term: float

    @property
    def total(self) -> float:
        return self.hamiltonian_term + self.dissipator_term


def transported_state(W: PropagatorTable, rho) -> np.ndarray:
    """rho~(t) = W(t,0) rho W(0,t) at every grid time of ``W``."""
    return np.einsum("kab,bc,kdc->kad", W.mats, rho, W.mats.conj())


def _hamiltonian_term(frame, eps, t, j, k, rho_t) -> float:
    ev, P = frame.at(t)
    dP = frame.projector_derivatives(t)
    M = P[k] @ dP[k] @ rho_t @ dP[k] @ P[k]
    return float(eps ** 2 * np.trace(M).real / (ev[j] - ev[k]) ** 2)


def perturbative_transition(model: LindbladModel, eps: float, g: float, t: float, j: int, k: int,
                            rho_j=None, frame=None, tol: float = 1e-7, n0: int = 65,
                            max_doublings: int = 8) -> PerturbativeTransition:
    """Two-term approximation of Tr(P_k(t) U(t,0)(rho_j)), j != k.

    hamiltonian_term = eps^2 Tr(P_k P_k' rho~_j P_k' P_k) / (e_j - e_k)^2 at t,
    dissipator_term = (g/eps) sum_l int_0^t Tr(P_k Gamma_l rho~_j Gamma_l* P_k) ds,
    with rho~_j(s) = W(s,0) rho_j W(0,s).
    """
    frame = _frame(model, frame)
    _require_singletons(frame, j, k)
    if j == k:
        raise ValueError("j and k must differ")
    P0 = frame.at(0.0)[1]
    rho = P0[j] if rho_j is None else np.asarray(rho_j, dtype=complex)
    if np.linalg.norm(P0[j] @ rho @ P0[j] - rho) > 1e-9:
        raise ValueError("rho_j must be supported in P_j(0)")

    def integral(n):
        grid = _odd_grid(t, n)
        W = kato_W(frame, grid)
        rt = transported_state(W, rho)
        vals = []
        for s, r in zip(grid, rt):
            Pk = frame.at(s)[1][k]
            vals.append(sum(np.trace(Pk @ G @ r @ G.conj().T @ Pk).real for G in model.jump_ops(s)))
        return float(simpson(vals, x=grid)), rt[-1]

    if model.jumps and g != 0 and t > 0:
        I, rho_t = integral(n0)
        n = n0
        for _ in range(max_doublings):
            n = 2 * n - 1
            I2, rho_t = integral(n)
            done = abs(I2 - I) <= tol * max(abs(I2), 1e-300)
            I = I2
            if done:
                break
        diss = (g / eps) * I
    else:
        W = kato_W(frame, _odd_grid(t, n0)) if t > 0 else None
        rho_t = transported_state(W, rho)[-1] if W is not None else rho
        diss = 0.0
    return PerturbativeTransition(_hamiltonian_term(frame, eps, t, j, k, rho_t), diss)


@dataclass
class HamiltonianTransition:
    population: float
    coherences: dict = field(default_factory=dict)


def hamiltonian_adiabatic_transition(model: LindbladModel, eps: float, t: float, j: int, k: int,
                                     rho_j=None, frame=None) -> HamiltonianTransition:
    """Leading terms of P_k U0(t,0)(rho_j) P_k and of the coherence blocks.

    ``coherences[(n, m)]`` approximates P_n(t) U0(t,0)(rho_j) P_m(t):
    order eps when n or m equals j, order eps^2 otherwise.
    """
    frame = _frame(model, frame)
    d = frame.n_groups
    _require_singletons(frame, *range(d))
    P0 = frame.at(0.0)[1]
    rho = P0[j] if rho_j is None else np.asarray(rho_j, dtype=complex)
    W = kato_W(frame, _odd_grid(t, 65)) if t > 0 else None
    rt = transported_state(W, rho)[-1] if W is not None else rho
    ev, P = frame.at(t)
    dP = frame.projector_derivatives(t)
    coh = {}
    for n in range(d):
        for m in range(d):
            if n == m:
                continue
            if n == j:
                coh[(n, m)] = 1j * eps * rt @ dP[m] @ P[m] / (ev[m] - ev[j])
            elif m == j:
                coh[(n, m)] = (1j * eps * rt @ dP[n] @ P[n] / (ev[n] - ev[j])).conj().T
            else:
                coh[(n, m)] = eps ** 2 * (P[n] @ dP[n] @ rt @ dP[m] @ P[m]) / ((ev[j] - ev[n]) * (ev[j] - ev[m]))
    pop = _hamiltonian_term(frame, eps, t, j, k, rt) if k != j else float("nan")
    return HamiltonianTransition(pop, coh)


# -- splitting matrix and reduced dynamics ---------------------------------------------------

@dataclass
class SplittingMatrix:
    """L~(t) with eigen-data; index 0 is the zero eigenvalue."""

    t: float
    matrix: np.ndarray
    eigenvalues: np.ndarray
    right: np.ndarray  # columns nu_j
    left: np.ndarray   # columns mu_j, <<mu_j, mu_j>> = d, <<mu_j, nu_j>> = 1
    projectors: np.ndarray | None = None

    @property
    def column_sums(self) -> np.ndarray:
        return self.matrix.sum(axis=0)


def splitting_matrix_from_projectors(P, jumps) -> np.ndarray:
    """L~_kj = sum_l Tr(P_k G_l P_j G_l*) - delta_jk Tr(G_l P_k G_l*)."""
    d = len(P)
    L = np.zeros((d, d))
    for G in jumps:
        Gd = G.conj().T
        for jdx in range(d):
            GPG = G @ P[jdx] @ Gd
            for kdx in range(d):
                L[kdx, jdx] += np.trace(P[kdx] @ GPG).real
            L[jdx, jdx] -= np.trace(GPG).real
    return L


def _eigen_data(L: np.ndarray):
    d = L.shape[0]
    w, vl, vr = eig(L, left=True, right=True)
    i0 = int(np.argmin(np.abs(w)))
    rest = [i for i in np.argsort(-w.real, kind="stable") if i != i0]
    order = [i0] + rest
    w, vl, vr = w[order], vl[:, order], vr[:, order]
    for i in range(d):
        mu = vl[:, i]
        mu = mu * math.sqrt(d) / np.linalg.norm(mu)
        big = np.argmax(np.abs(mu))
        mu = mu * (np.abs(mu[big]) / mu[big])
        nu = vr[:, i] / np.vdot(mu, vr[:, i])
        vl[:, i], vr[:, i] = mu, nu
    w[0] = 0.0
    return w, vr, vl


def splitting_matrix(model: LindbladModel, t: float, frame: SpectralFrame | None = None) -> SplittingMatrix:
    """Matrix of the dissipator compressed to span{P_1(t), ..., P_d(t)}.

    |<phi_k|G phi_j>|^2 = Tr(P_k G P_j G*) does not depend on eigenvector
    phases, so the labeled projectors suffice.
    """
    frame = _frame(model, frame)
    if not frame.singleton:
        raise ValueError("splitting_matrix requires a simple spectrum of H(t)")
    P = frame.at(t)[1]
    L = splitting_matrix_from_projectors(P, model.jump_ops(t)) if model.jumps else np.zeros((len(P),) * 2)
    w, vr, vl = _eigen_data(L)
    return SplittingMatrix(float(t), L, w, vr, vl, P)


def stationary_state(sm: SplittingMatrix, projectors=None) -> np.ndarray:
    """nu~_0(t) = sum_k c_k P_k(t), c the trace-normalized kernel vector of L~(t)."""
    L = sm.matrix
    U, sv, Vh = np.linalg.svd(L)
    null = sv <= 1e-10 * max(sv[0], 1.0)
    if int(null.sum()) != 1:
        raise InvariantError(f"kernel of L~ has dimension {int(null.sum())} (Split fails)")
    ker = Vh[-1].conj()[:, None]
    c = np.real(ker[:, 0])
    c = c / c.sum()
    if np.min(c) < -1e-10:
        raise InvariantError(f"stationary weights negative: {c}")
    P = sm.projectors if projectors is None else projectors
    return np.einsum("k,kab->ab", c, P), c


@dataclass
class ReducedDynamics:
    delta: float
    times: np.ndarray
    pop: np.ndarray  # pop[i] = Psi~_delta(t_i, s) in the basis {P_j(0)}

    @property
    def s(self) -> float:
        return float(self.times[0])

    def lifted(self, i: int, P0) -> np.ndarray:
        """Psi~ on the full space: M on span{P_j(0)}, identity on the coherences."""
        d = len(P0)
        Q = np.eye(d * d) - pinching_superop(P0)
        M = self.pop[i]
        S = sum(M[k, j] * np.outer(vec(P0[k]), vec(P0[j]).conj()) for k in range(d) for j in range(d))
        return S + Q

    def composed(self, i: int, W: np.ndarray, P0) -> np.ndarray:
        """W0(t,0) Psi~(t,0) P0(0), using W0 = W . W* on Ran P0(0)."""
        return conj_superop(W) @ self.lifted(i, P0) @ pinching_superop(P0)


def reduced_dynamics(model: LindbladModel, delta: float, times=None, frame=None,
                     tol: float = 1e-11) -> ReducedDynamics:
    """Solve d/dt M = (1/delta) L~(t) M, M(s) = I, on the population space."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    frame = _frame(model, frame)
    times = np.linspace(0.0, 1.0, 101) if times is None else np.asarray(times, float)
    if len(times) == 1:
        return ReducedDynamics(delta, times, np.eye(frame.n_groups)[None])
    gen = lambda u: splitting_matrix_from_projectors(frame.at(u)[1], model.jump_ops(u)).astype(complex)
    tab = evolve(gen, times, delta, tol, family="ReducedDynamics")
    return ReducedDynamics(delta, times, tab.mats.real.copy())


@dataclass
class MarkovTable:
    times: np.ndarray
    rates: np.ndarray  # rates[i] = L~(t_i)^T

    def max_row_sum(self) -> float:
        return float(np.max(np.abs(self.rates.sum(axis=2))))

    def min_offdiag(self) -> float:
        d = self.rates.shape[1]
        mask = ~np.eye(d, dtype=bool)
        return float(np.min(self.rates[:, mask]))

    def transition_matrices(self, delta: float = 1.0, substeps: int = 20) -> np.ndarray:
        """Time-ordered exponential P' = P Q / delta by midpoint matrix exponentials.

        Requires a callable rate source for substeps, so rates between grid
        times are linearly interpolated.
        """
        d = self.rates.shape[1]
        out = [np.eye(d)]
        Pm = np.eye(d)
        for i in range(1, len(self.times)):
            a, b = self.times[i - 1], self.times[i]
            hs = (b - a) / substeps
            for m in range(substeps):
                lam = (m + 0.5) / substeps
                Q = (1 - lam) * self.rates[i - 1] + lam * self.rates[i]
                Pm = Pm @ expm(hs * Q / delta)
            out.append(Pm.copy())
        return np.array(out)


def markov_generator(model: LindbladModel, times=None, frame=None, tol: float = 1e-12) -> MarkovTable:
    """Transposed splitting matrices as time-dependent Markov rate matrices."""
    frame = _frame(model, frame)
    times = np.linspace(0.0, 1.0, 101) if times is None else np.asarray(times, float)
    if model.jumps:
        rates = np.array([splitting_matrix_from_projectors(frame.at(t)[1], model.jump_ops(t)).T for t in times])
    else:
        rates = np.zeros((len(times), frame.n_groups, frame.n_groups))
    table = MarkovTable(times, rates)
    if table.min_offdiag() < -tol:
        raise InvariantError(f"negative Markov rate {table.min_offdiag():.3g}")
    if table.max_row_sum() > tol:
        raise InvariantError(f"Markov row sums deviate by {table.max_row_sum():.3g}")
    return table


# -- spectral data of the full Lindbladian ------------------------------------------------------

@dataclass
class LindbladSpectrum:
    t: float
    eigenvalues: np.ndarray   # length d^2; [0] is the pinned zero, [1:d] the rest of the 0-group
    right: np.ndarray         # columns
    left: np.ndarray          # columns, left[:, i]^H right[:, i] = 1
    d: int
    pairs: list               # (j, k) labels of the entries d..d^2-1

    def projector(self, i: int) -> np.ndarray:
        return np.outer(self.right[:, i], self.left[:, i].conj())

    def zero_group_projector(self) -> np.ndarray:
        return sum(self.projector(i) for i in range(self.d))


class LindbladSpectralFrame:
    """Labeled eigen-decomposition of L_t^{[g]} = L^0_t + g L^1_t.

    Label 0 is the exact zero eigenvalue (pinned), labels 1..d-1 are
    matched to the nonzero eigenvalues g * lambda~_j(t) of the splitting
    matrix, and the remaining labels to -i(e_j - e_k) ordered by (j, k).
    """

    def __init__(self, model: LindbladModel, g: float, grid=None, frame=None, step: float | None = None):
        self.model = model
        self.g = g
        self.frame = _frame(model, frame)
        self.grid = np.linspace(0.0, 1.0, 101) if grid is None else np.asarray(grid, float)
        self.step = self.frame.step if step is None else step
        self._cache: dict = {}
        self.table = [self.at(t) for t in self.grid]

    def at(self, t: float) -> LindbladSpectrum:
        t = float(t)
        hit = self._cache.get(t)
        if hit is not None:
            return hit
        m, g = self.model, self.g
        d = m.dim
        ev_H, P = self.frame.at(t)
        sm = splitting_matrix(m, t, self.frame)
        L = m.lindbladian(t, g)
        w, vl, vr = eig(L, left=True, right=True)
        pairs = [(j, k) for j in range(d) for k in range(d) if j != k]
        refs = np.concatenate([g * sm.eigenvalues, [-1j * (ev_H[j] - ev_H[k]) for j, k in pairs]])
        cost = np.abs(refs[:, None] - w[None, :])
        rows, cols = linear_sum_assignment(cost)
        order = cols[np.argsort(rows)]
        assigned = cost[np.arange(len(refs)), order]
        masked = cost.copy()
        masked[np.arange(len(refs)), order] = np.inf
        if np.any(assigned >= masked.min(axis=1)):
            raise LabelingError(f"eigenvalue collision in L^[g] at t={t:.4g}, g={g}")
        w, vl, vr = w[order], vl[:, order], vr[:, order]
        # pin the kernel: exact zero, trace functional as left vector, steady state as right vector
        ss = null_space(L)
        if ss.shape[1] != 1:
            ss = np.linalg.svd(L)[2][-1].conj()[:, None]
        rho = unvec(ss[:, 0], d)
        rho = rho / np.trace(rho)
        rho = 0.5 * (rho + rho.conj().T)
        w[0] = 0.0
        vr[:, 0] = vec(rho)
        vl[:, 0] = vec(np.eye(d))
        for i in range(1, d * d):
            vr[:, i] = vr[:, i] / np.vdot(vl[:, i], vr[:, i])
        out = LindbladSpectrum(t, w, vr, vl, d, pairs)
        if len(self._cache) > 20000:
            self._cache.clear()
        self._cache[t] = out
        return out

    def eigenvalues(self) -> np.ndarray:
        return np.array([s.eigenvalues for s in self.table])

    def ratio_residuals(self, t: float) -> np.ndarray:
        """|lambda_j^{[g]}(t)/g - lambda~_j(t)| for j = 1..d-1."""
        d = self.model.dim
        sm = splitting_matrix(self.model, t, self.frame)
        return np.abs(self.at(t).eigenvalues[1:d] / self.g - sm.eigenvalues[1:d])

    def projectors(self, t: float) -> np.ndarray:
        s = self.at(t)
        return np.array([s.projector(i) for i in range(s.d ** 2)])

    def kato_generator(self, t: float) -> np.ndarray:
        """K^{[g]}(t) = sum_i P_i'(t) P_i(t) over all one-dimensional projectors."""
        h = self.step
        Pm = [self.projectors(t + k * h) for k in (-2, -1, 1, 2)]
        dP = (Pm[0] - 8 * Pm[1] + 8 * Pm[2] - Pm[3]) / (12 * h)
        return np.einsum("iab,ibc->ac", dP, self.projectors(t))


def lindblad_spectral_frame(model: LindbladModel, g: float, grid=None, frame=None) -> LindbladSpectralFrame:
    return LindbladSpectralFrame(model, g, grid, frame)


def slow_drive_approx(model: LindbladModel, eps: float, g: float, times=None,
                      lframe: LindbladSpectralFrame | None = None, tol: float = 1e-10) -> PropagatorTable:
    """V(t,s) = W(t,s) sum_i P_i(s) exp(int_s^t lambda_i / eps).

    W solves W' = K^{[g]} W; this equals W(t,0) Psi_eps(t,s) W(0,s)^{-1}.
    """
    times = np.linspace(0.0, 1.0, 101) if times is None else np.asarray(times, float)
    lframe = LindbladSpectralFrame(model, g, times) if lframe is None else lframe
    W = evolve(lframe.kato_generator, times, 1.0, tol, family="W[g]")

    class _Frame:  # adapter for phase_integrals
        eigenvalues = lframe.eigenvalues()
        n_groups = model.dim ** 2

        @staticmethod
        def at(u):
            return lframe.at(u).eigenvalues, None

    ints = _complex_phase_integrals(_Frame, times, eps)
    Ps = lframe.projectors(times[0])
    mats = np.array([Wk @ np.einsum("i,iab->ab", np.exp(I / eps), Ps) for Wk, I in zip(W.mats, ints)])
    return PropagatorTable(times, mats, family="V[g]", eps=eps, g=g, tol=tol,
                           error_estimate=W.error_estimate)


def _complex_phase_integrals(frame, times, eps):
    emax = max(np.max(np.abs(frame.eigenvalues)), 1e-12)
    period = 2 * np.pi * eps / emax
    out = np.zeros((len(times), frame.n_groups), dtype=complex)
    for k in range(1, len(times)):
        a, b = times[k - 1], times[k]
        m = max(4, int(np.ceil((b - a) * 10 / period)))
        m += m % 2
        u = np.linspace(a, b, m + 1)
        vals = np.array([frame.at(x)[0] for x in u])
        out[k] = out[k - 1] + simpson(vals, x=u, axis=0)
    return out


def transition_regime_approx(model: LindbladModel, eps: float, g: float, times=None,
                             frame=None) -> PropagatorTable:
    """W0(t,0) Psi~_{eps/g}(t,0) P0(0) for every grid time."""
    frame = _frame(model, frame)
    _require_singletons(frame, *range(frame.n_groups))
    times = np.linspace(0.0, 1.0, 101) if times is None else np.asarray(times, float)
    W = kato_W(frame, times)
    rd = reduced_dynamics(model, eps / g, times, frame)
    P0 = frame.at(times[0])[1]
    mats = np.array([rd.composed(i, W.mats[i], P0) for i in range(len(times))])
    return PropagatorTable(times, mats, family="transition", eps=eps, g=g)


def induced_norm(S, **kw) -> float:
    return induced_trace_norm(S, **kw)
