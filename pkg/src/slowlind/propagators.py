"""Two-parameter evolution families and the adaptive integrator behind them.

Every family solves a linear matrix ODE ``eps X'(t) = G(t) X(t)`` with
``X(s) = I`` using one embedded Dormand-Prince 5(4) kernel that lands
exactly on the requested output times.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import LindbladModel, SpectralFrame, match_labels, spectral_groups
from .operators import commutator_superop, kron, pinching_superop


class IntegrationError(RuntimeError):
    """Step-size underflow or a non-finite state."""


class GapCollapseError(RuntimeError):
    """The gap of a superadiabatic Hamiltonian H^q fell below half the base gap."""


# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


@dataclass
class PropagatorTable:
    """X(t_k, s) sampled on increasing grid times t_0 = s < t_1 < ...."""

    times: np.ndarray
    mats: np.ndarray
    family: str = ""
    eps: float | None = None
    g: float | None = None
    tol: float | None = None
    error_estimate: float = 0.0
    n_steps: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def s(self) -> float:
        return float(self.times[0])

    @property
    def final(self) -> np.ndarray:
        return self.mats[-1]

    def index(self, t: float) -> int:
        k = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[k] - t) > 1e-12:
            raise KeyError(f"t={t} is not a grid time of this table")
        return k

    def at(self, t: float) -> np.ndarray:
        return self.mats[self.index(t)]

    def metadata(self) -> dict:
        return {"family": self.family, "eps": self.eps, "g": self.g, "tol": self.tol,
                "s": self.s, "achieved_error": self.error_estimate, "n_steps": self.n_steps,
                "shape": list(self.mats.shape[1:]), **self.meta}

    def to_csv(self, path) -> Path:
        """Write ``path`` (t, s, re/im entries row-major) plus ``path.json`` metadata."""
        path = Path(path)
        n = self.mats.shape[1] * self.mats.shape[2]
        flat = self.mats.reshape(len(self.times), n)
        data = np.empty((len(self.times), 2 + 2 * n))
        data[:, 0] = self.times
        data[:, 1] = self.s
        data[:, 2::2] = flat.real
        data[:, 3::2] = flat.imag
        header = ",".join(["t", "s"] + [f"{p}{k}" for k in range(n) for p in ("re", "im")])
        np.savetxt(path, data, delimiter=",", header=header, comments="", fmt="%.17g")
        with open(path.with_suffix(path.suffix + ".json"), "w") as fh:
            json.dump({"schema_version": 1, **self.metadata()}, fh, indent=2, sort_keys=True)
        return path


def evolve(generator, times, eps: float = 1.0, tol: float = 1e-10, x0=None,
           family: str = "", max_steps: int = 2_000_000, h0: float | None = None) -> PropagatorTable:
    """Integrate eps X' = G(t) X from times[0] through all later grid times.

    Parameters
    ----------
    generator : callable
        t -> square matrix G(t).
    times : array_like
        Increasing output times; the first one is the initial time s.
    eps : float
        Scale dividing the right-hand side.
    tol : float
        Per-entry local error tolerance (absolute and relative).

    Returns
    -------
    PropagatorTable
        ``error_estimate`` accumulates the embedded local error estimates of
        all accepted steps.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")
    inv = 1.0 / eps
    t = float(times[0])
    G0 = np.asarray(generator(t), dtype=complex)
    n = G0.shape[0]
    X = np.eye(n, dtype=complex) if x0 is None else np.array(x0, dtype=complex)
    out = np.empty((len(times),) + X.shape, dtype=complex)
    out[0] = X
    f = inv * (G0 @ X)
    span = times[-1] - times[0]
    if h0 is None:
        gnorm = np.linalg.norm(G0, 2) * inv
        h = span if gnorm == 0 else min(span, 0.05 * tol ** 0.2 / gnorm)
        h = max(h, 1e-6 * span) if gnorm == 0 else h
    else:
        h = h0
    err_total = 0.0
    steps = 0
    with np.errstate(over="ignore", invalid="ignore"):  # non-finite states are caught below
        for k in range(1, len(times)):
            target = times[k]
            while t < target:
                last = t + h >= target - 1e-15 * max(1.0, abs(target))
                hs = target - t if last else h
                K = [f]
                for i in range(1, 7):
                    Y = X + hs * sum(a * Kj for a, Kj in zip(_A[i], K) if a != 0.0)
                    K.append(inv * (np.asarray(generator(t + _C[i] * hs), dtype=complex) @ Y))
                Xn = Y  # stage 7 state equals the 5th-order solution (FSAL)
                E = hs * sum(e * Kj for e, Kj in zip(_E, K) if e != 0.0)
                scale = tol * (1.0 + np.maximum(np.abs(X), np.abs(Xn)))
                err = float(np.max(np.abs(E) / scale))
                if not np.isfinite(err):
                    raise IntegrationError(f"non-finite state at t={t:.6g} ({family})")
                if err <= 1.0:
                    t = target if last else t + hs
                    X = Xn
                    f = K[6]
                    err_total += float(np.max(np.abs(E)))
                    steps += 1
                    fac = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
                    if not last or fac < 1.0:
                        h = hs * fac
                else:
                    h = hs * max(0.2, 0.9 * err ** -0.25)
                if h < 1e-13 * max(1.0, abs(t)):
                    raise IntegrationError(f"step size underflow at t={t:.6g} ({family}); "
                                           f"generator norm {np.linalg.norm(generator(t), 2):.3g}, eps={eps}")
                if steps > max_steps:
                    raise IntegrationError(f"more than {max_steps} steps ({family})")
            out[k] = X
    return PropagatorTable(times, out, family=family, eps=eps, tol=tol,
                           error_estimate=err_total, n_steps=steps)


def _grid(times, s=0.0, t=1.0, n=101):
    return np.linspace(s, t, n) if times is None else np.asarray(times, dtype=float)


# -- Hamiltonian families ---------------------------------------------------------------

def schrodinger_U(model: LindbladModel, eps: float, times=None, tol: float = 1e-10) -> PropagatorTable:
    """i eps U' = H(t) U."""
    tab = evolve(lambda t: -1j * model.H(t), _grid(times), eps, tol, family="U")
    return tab


def conjugation_superop(U: np.ndarray) -> np.ndarray:
    """Superoperator rho -> U rho U*."""
    return kron(U.conj(), U)


def lindblad_U(model: LindbladModel, eps: float, g: float, times=None, tol: float = 1e-10) -> PropagatorTable:
    """eps d/dt U(t,s) = L_t^{[g]} U(t,s) on column-stacked superoperators."""
    if eps <= 0 or g < 0:
        raise ValueError("need eps > 0 and g >= 0")
    tab = evolve(lambda t: model.lindbladian(t, g), _grid(times), eps, tol, family="Lindblad")
    tab.g = g
    return tab


def kato_W(frame: SpectralFrame, times=None, tol: float = 1e-11) -> PropagatorTable:
    """W' = K(t) W with K = sum_j P_j' P_j."""
    return evolve(frame.kato_generator, _grid(times), 1.0, tol, family="W")


def superop_kato_W0(frame: SpectralFrame, times=None, tol: float = 1e-11) -> PropagatorTable:
    """W0' = [P0', P0] W0 for the pinching map P0(t) = sum_j P_j(t) . P_j(t)."""
    def gen(t):
        P0 = pinching_superop(frame.at(t)[1])
        dP0 = frame.pinching_derivative(t)
        return dP0 @ P0 - P0 @ dP0
    return evolve(gen, _grid(times), 1.0, tol, family="W0")


def phase_integrals(frame: SpectralFrame, times, eps: float, min_points: int = 10) -> np.ndarray:
    """Cumulative integrals int_{t_0}^{t_k} e_j(u) du by composite Simpson.

    Each output interval is subdivided so that every 2 pi eps / max|e|
    oscillation of the resulting phase carries at least ``min_points`` nodes.
    """
    times = np.asarray(times, dtype=float)
    emax = max(np.max(np.abs(frame.eigenvalues)), 1e-12)
    period = 2 * np.pi * eps / emax
    out = np.zeros((len(times), frame.n_groups))
    for k in range(1, len(times)):
        a, b = times[k - 1], times[k]
        m = max(4, int(np.ceil((b - a) * min_points / period)))
        m += m % 2
        u = np.linspace(a, b, m + 1)
        vals = np.array([frame.at(x)[0] for x in u])
        w = np.ones(m + 1)
        w[1:-1:2] = 4
        w[2:-1:2] = 2
        out[k] = out[k - 1] + (b - a) / (3 * m) * (w @ vals)
    return out


def dynamical_phase(frame: SpectralFrame, eps: float, times=None) -> PropagatorTable:
    """Phi_eps(t, s) = sum_j P_j(0) exp(-(i/eps) int_s^t e_j)."""
    if not frame.singleton:
        raise ValueError("dynamical_phase requires singleton spectral groups")
    times = _grid(times)
    ints = phase_integrals(frame, times, eps)
    P0 = frame.at(0.0)[1]
    mats = np.array([np.einsum("j,jab->ab", np.exp(-1j * I / eps), P0) for I in ints])
    return PropagatorTable(times, mats, family="Phi", eps=eps)


def adiabatic_V(frame: SpectralFrame, eps: float, times=None, tol: float = 1e-10) -> PropagatorTable:
    """i eps V' = (H + i eps K) V."""
    H = frame.H
    return evolve(lambda t: -1j * H(t) + eps * frame.kato_generator(t), _grid(times), eps, tol,
                  family="V")


def factorized_V(W: PropagatorTable, Phi: PropagatorTable) -> np.ndarray:
    """W(t,0) Phi(t,0) for each common grid time (the factorization of V(t,0))."""
    return np.einsum("kab,kbc->kac", W.mats, Phi.mats)


# -- superadiabatic hierarchy -------------------------------------------------------------

class SuperadiabaticFrame:
    """Hierarchy H^n = H - i eps K^{n-1}, P^n from H^n, K^n = sum (P^n)' P^n, n <= q.

    Values at a time t are computed on the integer lattice t + m h with
    nested fourth-order central differences; P^n is labeled by overlap with
    the base projectors P^0.
    """

    def __init__(self, frame: SpectralFrame, eps: float, q: int, step: float | None = None):
        if not 0 <= q <= 3:
            raise ValueError("superadiabatic order q must be in 0..3")
        self.frame = frame
        self.eps = eps
        self.q = q
        self.h = frame.step if step is None else step
        self.base_gap = float(np.min(frame.gaps))

    def levels(self, t: float) -> list:
        """[(H^n, P^n, K^n) for n = 0..q] at time t."""
        t = float(t)
        h, eps = self.h, self.eps
        P_memo: dict = {}
        K_memo: dict = {}

        def P(n, m):
            key = (n, m)
            if key not in P_memo:
                tau = t + m * h
                P0 = self.frame.at(tau)[1]
                if n == 0:
                    P_memo[key] = (self.frame.H(tau), P0)
                else:
                    Hn = self.frame.H(tau) - 1j * eps * K(n - 1, m)
                    Hn = 0.5 * (Hn + Hn.conj().T)
                    ev, Ps, _ = spectral_groups(Hn, self.frame.threshold)
                    gap = np.min(np.diff(np.sort(ev))) if len(ev) > 1 else np.inf
                    if len(ev) != len(P0) or gap < 0.5 * self.base_gap:
                        raise GapCollapseError(f"gap of H^{n} collapsed at t={tau:.4g} (eps={eps})")
                    perm = match_labels(P0, Ps)
                    P_memo[key] = (Hn, np.array([Ps[p] for p in perm]))
            return P_memo[key]

        def K(n, m):
            key = (n, m)
            if key not in K_memo:
                Pm = [P(n, m + k)[1] for k in (-2, -1, 1, 2)]
                dP = (Pm[0] - 8 * Pm[1] + 8 * Pm[2] - Pm[3]) / (12 * h)
                K_memo[key] = np.einsum("jab,jbc->ac", dP, P(n, m)[1])
            return K_memo[key]

        return [(P(n, 0)[0], P(n, 0)[1], K(n, 0)) for n in range(self.q + 1)]

    def K(self, t: float, n: int | None = None) -> np.ndarray:
        n = self.q if n is None else n
        return self.levels(t)[n][2]

    def generator(self, t: float) -> np.ndarray:
        """-i H^q + eps K^q + eps D_q K^{q-1}; the ODE is eps Vhat' = G Vhat."""
        lev = self.levels(t)
        Hq, Pq, Kq = lev[self.q]
        G = -1j * Hq + self.eps * Kq
        if self.q >= 1:
            Kprev = lev[self.q - 1][2]
            G = G + self.eps * np.einsum("jab,bc,jcd->ad", Pq, Kprev, Pq)
        return G


def superadiabatic_frame(frame: SpectralFrame, eps: float, q: int) -> SuperadiabaticFrame:
    return SuperadiabaticFrame(frame, eps, q)


def superadiabatic_Vhat(saframe: SuperadiabaticFrame, times=None, tol: float = 1e-10) -> PropagatorTable:
    """Solve i eps Vhat' = (H^q + i eps K^q + i eps D_q K^{q-1}) Vhat.

    The factor i eps on the block-diagonal term D_q K^{q-1} = sum_j P_j^q K^{q-1} P_j^q
    keeps the generator anti-Hermitian, so that Vhat is unitary and its
    generator differs from -i H / eps only by the off-diagonal part of K^q - K^{q-1}.
    """
    tab = evolve(saframe.generator, _grid(times), saframe.eps, tol, family=f"Vhat{saframe.q}")
    tab.meta["q"] = saframe.q
    return tab


# -- diagnostics ---------------------------------------------------------------------------

def unitarity_deficit(tab: PropagatorTable) -> float:
    n = tab.mats.shape[1]
    return float(max(np.linalg.norm(X.conj().T @ X - np.eye(n), 2) for X in tab.mats))


def intertwining_residual(tab: PropagatorTable, projectors_at, s_projectors=None) -> float:
    """max_t max_j ||X(t,s) P_j(s) - P_j(t) X(t,s)||."""
    Ps = projectors_at(tab.s) if s_projectors is None else s_projectors
    worst = 0.0
    for t, X in zip(tab.times, tab.mats):
        Pt = projectors_at(t)
        for Pa, Pb in zip(Ps, Pt):
            worst = max(worst, np.linalg.norm(X @ Pa - Pb @ X, 2))
    return float(worst)


def cocycle_residual(generator, eps: float, triples, tol: float = 1e-10) -> float:
    """max ||X(t,r) - X(t,s) X(s,r)|| over sampled r < s < t."""
    worst = 0.0
    for r, s, t in triples:
        Xtr = evolve(generator, [r, t], eps, tol).final
        Xsr = evolve(generator, [r, s], eps, tol).final
        Xts = evolve(generator, [s, t], eps, tol).final
        worst = max(worst, float(np.linalg.norm(Xtr - Xts @ Xsr, 2)))
    return worst


def lindblad_generator(model: LindbladModel, g: float):
    return lambda t: model.lindbladian(t, g)


def hamiltonian_superop_generator(model: LindbladModel):
    return lambda t: commutator_superop(model.H(t))
