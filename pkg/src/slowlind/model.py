"""Time-dependent Lindblad models, schedules and instantaneous spectral data."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import expm
from scipy.optimize import linear_sum_assignment

from .operators import (InvalidInputError, dissipator_superop, is_hermitian,
                        lindblad_superop, operator_from_json)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)

DEFAULT_FD_STEP = 1e-3


class ModelError(ValueError):
    """Unknown model names, inconsistent dimensions, bad configuration."""


class LabelingError(RuntimeError):
    """Overlap matching between neighbouring spectral frames is ambiguous."""


# -- schedules ---------------------------------------------------------------------

def _f(t: float) -> float:
    return math.exp(-1.0 / t) if t > 0 else 0.0


def _switch(t: float) -> float:
    a, b = _f(t), _f(1.0 - t)
    return a / (a + b)


def smooth_switch(t: float) -> float:
    """C-infinity switch theta(t) = f(t) / (f(t) + f(1 - t)), f(t) = exp(-1/t).

    All derivatives vanish at both endpoints.
    """
    if not 0.0 <= t <= 1.0:
        raise InvalidInputError(f"smooth_switch is defined on [0, 1], got t={t}")
    return _switch(t)


def flat_start_bump(t: float) -> float:
    """chi(t) = 2 theta(t/2): flat at t = 0, chi(1) = 1 with chi'(1) = 2.

    Unlike :func:`smooth_switch` the endpoint t = 1 is not flat, so quantities
    evaluated at t = 1 keep their power-law dependence on the adiabatic
    parameter.  Extended by 0 for t < 0 and by 2 for t > 2 so that finite
    difference stencils may cross the ends of [0, 1].
    """
    if t <= 0.0:
        return 0.0
    if t >= 2.0:
        return 2.0
    return 2.0 * _switch(0.5 * t)


@dataclass
class SmoothSchedule:
    """Scalar schedule s(t) used to reparametrize operator curves.

    kind is one of ``flat-start-bump``, ``polynomial`` (``coeffs`` in
    increasing degree) or ``user-sampled`` (``times``/``values``, cubic
    spline).  Outside [0, 1] polynomial and sampled schedules are extended
    by their endpoint values.
    """

    kind: str = "flat-start-bump"
    coeffs: Sequence[float] | None = None
    times: Sequence[float] | None = None
    values: Sequence[float] | None = None

    def __post_init__(self):
        if self.kind == "flat-start-bump":
            self._fn = flat_start_bump
        elif self.kind == "polynomial":
            c = np.asarray(self.coeffs if self.coeffs is not None else [0.0, 1.0], dtype=float)
            poly = np.polynomial.Polynomial(c)
            self._fn = lambda t: float(poly(min(max(t, 0.0), 1.0)))
        elif self.kind == "user-sampled":
            if self.times is None or self.values is None:
                raise ModelError("user-sampled schedule needs times and values")
            spline = CubicSpline(np.asarray(self.times, float), np.asarray(self.values, float))
            lo, hi = float(self.times[0]), float(self.times[-1])
            self._fn = lambda t: float(spline(min(max(t, lo), hi)))
        else:
            raise ModelError(f"unknown schedule kind {self.kind!r}")

    def __call__(self, t: float) -> float:
        return self._fn(float(t))


# -- operator paths ------------------------------------------------------------------

class OperatorPath:
    """Smooth matrix-valued curve t -> A(t) with a finite-difference derivative."""

    def __init__(self, func: Callable[[float], np.ndarray], dim: int, hermitian: bool = False,
                 name: str = "", step: float = DEFAULT_FD_STEP):
        self.func = func
        self.dim = int(dim)
        self.hermitian = hermitian
        self.name = name
        self.step = step
        self._cache: dict[float, np.ndarray] = {}

    def __call__(self, t: float) -> np.ndarray:
        t = float(t)
        A = self._cache.get(t)
        if A is None:
            A = np.asarray(self.func(t), dtype=complex)
            if A.shape != (self.dim, self.dim):
                raise ModelError(f"path {self.name!r} returned shape {A.shape}")
            A.setflags(write=False)
            if len(self._cache) > 20000:
                self._cache.clear()
            self._cache[t] = A
        return A

    def derivative(self, t: float, h: float | None = None) -> np.ndarray:
        """Fourth-order central difference."""
        h = self.step if h is None else h
        return (self(t - 2 * h) - 8 * self(t - h) + 8 * self(t + h) - self(t + 2 * h)) / (12 * h)

    def richardson_error(self, t: float, h: float | None = None) -> float:
        """Difference between derivative estimates at steps h and h/2."""
        h = self.step if h is None else h
        return float(np.linalg.norm(self.derivative(t, h) - self.derivative(t, h / 2)))

    @classmethod
    def constant(cls, A, name: str = "") -> "OperatorPath":
        A = np.asarray(A, dtype=complex)
        return cls(lambda t: A, A.shape[0], hermitian=is_hermitian(A), name=name)

    @classmethod
    def affine(cls, A0, A1, schedule: Callable[[float], float], hermitian: bool = False,
               name: str = "") -> "OperatorPath":
        """t -> A0 + s(t) A1."""
        A0 = np.asarray(A0, dtype=complex)
        A1 = np.asarray(A1, dtype=complex)
        return cls(lambda t: A0 + schedule(t) * A1, A0.shape[0], hermitian=hermitian, name=name)


@dataclass
class LindbladModel:
    """Hamiltonian path plus a list of jump-operator paths."""

    name: str
    hamiltonian: OperatorPath
    jumps: list = field(default_factory=list)
    params: dict = field(default_factory=dict)
    gap_threshold: float | None = None

    def __post_init__(self):
        for J in self.jumps:
            if J.dim != self.hamiltonian.dim:
                raise ModelError("jump operator dimension differs from the Hamiltonian")

    @property
    def dim(self) -> int:
        return self.hamiltonian.dim

    def H(self, t: float) -> np.ndarray:
        return self.hamiltonian(t)

    def jump_ops(self, t: float) -> list:
        return [J(t) for J in self.jumps]

    def lindbladian(self, t: float, g: float) -> np.ndarray:
        return lindblad_superop(self.H(t), self.jump_ops(t), g)

    def dissipator(self, t: float) -> np.ndarray:
        if not self.jumps:
            return np.zeros((self.dim ** 2,) * 2, dtype=complex)
        return dissipator_superop(self.jump_ops(t))


# -- spectral frames -------------------------------------------------------------------

def spectral_groups(Hm: np.ndarray, threshold: float | None = None, rel: float = 0.1):
    """Eigen-decompose a Hermitian matrix and cluster its eigenvalues.

    Consecutive sorted eigenvalues closer than ``threshold`` (default
    ``rel`` times the spectral diameter) share a group.  Returns the group
    mean eigenvalues, the summed group projectors and the eigenvector blocks.
    """
    w, v = np.linalg.eigh(Hm)
    if threshold is None:
        diam = w[-1] - w[0]
        threshold = rel * diam if diam > 0 else 1e-12
    groups = [[0]]
    for i in range(1, len(w)):
        if w[i] - w[i - 1] > threshold:
            groups.append([i])
        else:
            groups[-1].append(i)
    evals = np.array([w[g].mean() for g in groups])
    vecs = [v[:, g] for g in groups]
    projs = [V @ V.conj().T for V in vecs]
    return evals, projs, vecs


def _overlap_matrix(Pa, Pb) -> np.ndarray:
    O = np.empty((len(Pa), len(Pb)))
    for j, A in enumerate(Pa):
        ra = np.trace(A).real
        for m, B in enumerate(Pb):
            rb = np.trace(B).real
            O[j, m] = np.real(np.trace(A @ B)) / math.sqrt(ra * rb)
    return O


def match_labels(P_ref, P_new, ambiguity: float = 0.1) -> np.ndarray:
    """Permutation perm with P_new[perm[j]] continuing P_ref[j]."""
    if len(P_ref) != len(P_new):
        raise LabelingError("number of spectral groups changed between frames")
    O = _overlap_matrix(P_ref, P_new)
    rows, cols = linear_sum_assignment(-O)
    perm = np.empty(len(P_ref), dtype=int)
    perm[rows] = cols
    for j in range(len(P_ref)):
        srt = np.sort(O[j])[::-1]
        if len(srt) > 1 and srt[0] - srt[1] < ambiguity:
            raise LabelingError(f"ambiguous overlap matching for label {j}: {srt[:2]}")
        if O[j, perm[j]] <= 0.5:
            raise LabelingError(f"overlap score {O[j, perm[j]]:.3f} <= 0.5 for label {j}")
    return perm


def _initial_order(projs) -> np.ndarray:
    """Order groups by maximal overlap with the computational basis."""
    d = projs[0].shape[0]
    W = np.array([np.real(np.diag(P)) for P in projs])  # W[group, basis index]
    if all(abs(np.trace(P).real - 1) < 1e-9 for P in projs):
        rows, cols = linear_sum_assignment(-W)
        return rows[np.argsort(cols)]
    com = W @ np.arange(d) / W.sum(axis=1)
    return np.argsort(com, kind="stable")


class SpectralFrame:
    """Labeled spectral data of H(t) on a time grid, with off-grid evaluation.

    Labels are fixed at the first grid time by overlap with the computational
    basis and continued by maximal projector overlap between neighbours.
    Off-grid queries are labeled against the nearest grid point.
    """

    def __init__(self, H: OperatorPath, grid, threshold: float | None = None,
                 step: float | None = None):
        self.H = H
        self.grid = np.asarray(grid, dtype=float)
        self.threshold = threshold
        self.step = H.step if step is None else step
        ev, Ps, Vs = spectral_groups(H(self.grid[0]), threshold)
        order = _initial_order(Ps)
        evals, projs, self.perms = [], [], [np.arange(len(Ps))]
        ev, Ps = ev[order], [Ps[i] for i in order]
        evals.append(ev)
        projs.append(Ps)
        for t in self.grid[1:]:
            ev_new, P_new, _ = spectral_groups(H(t), threshold)
            perm = match_labels(projs[-1], P_new)
            self.perms.append(perm)
            evals.append(ev_new[perm])
            projs.append([P_new[p] for p in perm])
        self.eigenvalues = np.array(evals)
        self.projectors = np.array(projs)
        self.ranks = np.array([int(round(np.trace(P).real)) for P in projs[0]])
        self.gaps = np.array([_min_gap(e) for e in self.eigenvalues])
        self._cache: dict[float, tuple] = {}

    @property
    def n_groups(self) -> int:
        return self.eigenvalues.shape[1]

    @property
    def singleton(self) -> bool:
        return bool(np.all(self.ranks == 1))

    def _nearest(self, t: float) -> int:
        k = int(np.searchsorted(self.grid, t))
        if k <= 0:
            return 0
        if k >= len(self.grid):
            return len(self.grid) - 1
        return k if self.grid[k] - t < t - self.grid[k - 1] else k - 1

    def at(self, t: float):
        """Labeled (eigenvalues, projectors) at an arbitrary time."""
        t = float(t)
        hit = self._cache.get(t)
        if hit is not None:
            return hit
        ev, Ps, _ = spectral_groups(self.H(t), self.threshold)
        perm = match_labels(self.projectors[self._nearest(t)], Ps)
        out = (ev[perm], np.array([Ps[p] for p in perm]))
        if len(self._cache) > 20000:
            self._cache.clear()
        self._cache[t] = out
        return out

    def projector_derivatives(self, t: float, h: float | None = None) -> np.ndarray:
        """P_j'(t); first-order perturbation formula for singleton bands, else differences."""
        if self.singleton and h is None:
            ev, P = self.at(t)
            dH = self.H.derivative(t)
            out = np.zeros_like(P)
            for j in range(len(P)):
                for k in range(len(P)):
                    if k != j:
                        X = P[j] @ dH @ P[k]
                        out[j] += (X + X.conj().T) / (ev[j] - ev[k])
            return out
        h = self.step if h is None else h
        P = [self.at(t + k * h)[1] for k in (-2, -1, 1, 2)]
        return (P[0] - 8 * P[1] + 8 * P[2] - P[3]) / (12 * h)

    def kato_generator(self, t: float) -> np.ndarray:
        """K(t) = sum_j P_j'(t) P_j(t)."""
        dP = self.projector_derivatives(t)
        P = self.at(t)[1]
        return np.einsum("jab,jbc->ac", dP, P)

    def pinching_derivative(self, t: float, h: float | None = None) -> np.ndarray:
        """Superoperator derivative of P_0(t) = sum_j P_j . P_j."""
        from .operators import conj_superop, kron
        if self.singleton and h is None:
            # d/dt sum_j conj(P_j) kron P_j
            P = self.at(t)[1]
            dP = self.projector_derivatives(t)
            return sum(kron(dp.conj(), p) + kron(p.conj(), dp) for p, dp in zip(P, dP))
        h = self.step if h is None else h
        S = [sum(conj_superop(P) for P in self.at(t + k * h)[1]) for k in (-2, -1, 1, 2)]
        return (S[0] - 8 * S[1] + 8 * S[2] - S[3]) / (12 * h)


def _min_gap(ev) -> float:
    if len(ev) < 2:
        return float("inf")
    e = np.sort(ev)
    return float(np.min(np.diff(e)))


def spectral_frame(H: OperatorPath, grid, grouping: float | None = None) -> SpectralFrame:
    """Per-time eigendecomposition with grouping and overlap-continued labels."""
    if not H.hermitian:
        for t in (grid[0], grid[len(grid) // 2], grid[-1]):
            if not is_hermitian(H(t)):
                raise InvalidInputError("spectral_frame requires a Hermitian path")
    return SpectralFrame(H, grid, threshold=grouping)


# -- hypothesis checks -------------------------------------------------------------------

@dataclass
class HypothesisReport:
    reg_flat_start: bool
    reg_margin: float
    spec_gap: bool
    gap_margin: float
    gen: bool
    gen_margin: float
    split: bool
    split_margin: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def check_hypotheses(model: LindbladModel, grid=None, gap: float | None = None,
                     tol: float = 1e-6) -> HypothesisReport:
    """Numerical checks of the flat start, the gap, genericity and splitting."""
    from .asymptotics import splitting_matrix

    grid = np.linspace(0.0, 1.0, 201) if grid is None else np.asarray(grid, float)
    H = model.hamiltonian
    h = 1e-4
    reg = max(np.linalg.norm(H.derivative(t, h), 2) for t in (3 * h, 5e-4, 1e-3))

    frame = spectral_frame(H, grid, model.gap_threshold)
    min_gap = float(np.min(frame.gaps))
    if gap is None:
        diam = max(np.ptp(np.linalg.eigvalsh(H(t))) for t in grid)
        gap = 0.1 * diam
    spec_ok = min_gap >= gap

    d = model.dim
    if frame.n_groups < d:
        gen_margin = 0.0
    else:
        gen_margin = float("inf")
        for e in frame.eigenvalues:
            bohr = np.array([e[j] - e[k] for j in range(d) for k in range(d) if j != k])
            diffs = np.abs(bohr[:, None] - bohr[None, :])[~np.eye(len(bohr), dtype=bool)]
            gen_margin = min(gen_margin, float(diffs.min()) if diffs.size else float("inf"))
    gen_ok = gen_margin >= tol

    split_margin = 0.0
    if gen_ok and model.jumps:
        split_margin = float("inf")
        for t in grid[:: max(1, len(grid) // 50)]:
            lam = splitting_matrix(model, t, frame).eigenvalues
            diffs = np.abs(lam[:, None] - lam[None, :])[~np.eye(d, dtype=bool)]
            split_margin = min(split_margin, float(diffs.min()))
    split_ok = split_margin >= tol
    return HypothesisReport(reg <= 1e-8, float(reg), bool(spec_ok), min_gap,
                            bool(gen_ok), float(gen_margin), bool(split_ok), float(split_margin))


# -- built-in models ---------------------------------------------------------------------

def _rot(theta: float, phi: float = 0.0) -> np.ndarray:
    """R = exp(-i phi sz/2) exp(-i theta sy/2), mapping |0> to the Bloch direction (theta, phi)."""
    Ry = np.cos(theta / 2) * np.eye(2) - 1j * np.sin(theta / 2) * SY
    Rz = np.diag([np.exp(-0.5j * phi), np.exp(0.5j * phi)])
    return Rz @ Ry


def _qubit(name, delta, theta_max, phi_max, gamma, jump, jump_frame, schedule):
    sched = SmoothSchedule(schedule) if isinstance(schedule, str) else schedule

    def R(t):
        s = sched(t)
        return _rot(theta_max * s, phi_max * s)

    def H(t):
        Rt = R(t)
        return 0.5 * delta * (Rt @ SZ @ Rt.conj().T)

    if jump_frame not in ("adiabatic", "lab"):
        raise ModelError(f"jump_frame must be 'adiabatic' or 'lab', got {jump_frame!r}")
    amp = math.sqrt(gamma)
    if jump == "dephasing":
        jumps = [OperatorPath(lambda t: amp * (2.0 / delta) * H(t), 2, hermitian=True, name="F(H)")]
    elif jump == "pump":
        # secular pair: fixed relaxation into phi_1, excitation rate gamma s(t)
        if jump_frame != "adiabatic":
            raise ModelError("qubit-pump is defined in the instantaneous eigenbasis only")
        down = np.array([[0, 1], [0, 0]], dtype=complex)
        up = down.T.copy()
        jumps = [OperatorPath(lambda t: amp * (R(t) @ down @ R(t).conj().T), 2, name="relax"),
                 OperatorPath(lambda t: amp * math.sqrt(max(sched(t), 0.0)) * (R(t) @ up @ R(t).conj().T),
                              2, name="excite")]
    else:
        J0 = {"sx": SX, "lowering": np.array([[0, 1], [0, 0]], dtype=complex)}[jump]
        if jump_frame == "lab":
            jumps = [OperatorPath.constant(amp * J0, name=jump)]
        else:
            jumps = [OperatorPath(lambda t: amp * (R(t) @ J0 @ R(t).conj().T), 2,
                                  hermitian=(jump == "sx"), name=jump)]
    params = dict(delta=delta, theta_max=theta_max, phi_max=phi_max, gamma=gamma,
                  jump_frame=jump_frame, schedule=sched.kind)
    return LindbladModel(name, OperatorPath(H, 2, hermitian=True, name="H"), jumps, params)


def random_model(d: int = 3, seed: int = 0, coupling: float = 0.4, gamma: float = 1.0,
                 n_jumps: int = 2, schedule: str = "flat-start-bump") -> LindbladModel:
    """Seeded random model H(t) = D + s(t) A with random lab-frame jumps.

    D has eigenvalues spread so that Bohr frequencies are generically distinct;
    A is a random Hermitian matrix of operator norm ``coupling``.
    """
    rng = np.random.default_rng(seed)
    levels = np.sort(rng.uniform(-1.0, 1.0, size=d)) * d
    D = np.diag(levels).astype(complex)
    X = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    A = X + X.conj().T
    A *= coupling / np.linalg.norm(A, 2)
    jumps = []
    for _ in range(n_jumps):
        G = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        G *= math.sqrt(gamma) / np.linalg.norm(G, 2)
        jumps.append(OperatorPath.constant(G, name="random"))
    sched = SmoothSchedule(schedule)
    H = OperatorPath.affine(D, A, sched, hermitian=True, name="H")
    params = dict(d=d, seed=seed, coupling=coupling, gamma=gamma, n_jumps=n_jumps, schedule=schedule)
    return LindbladModel(f"random-d{d}", H, jumps, params)


BUILTIN_DEFAULTS = {
    "qubit-sx": dict(delta=4.0, theta_max=math.pi / 2, gamma=1.0, jump_frame="adiabatic",
                     schedule="flat-start-bump"),
    "qubit-twist": dict(delta=4.0, theta_max=math.pi / 2, phi_max=math.pi, gamma=1.0,
                        jump_frame="adiabatic", schedule="flat-start-bump"),
    "qubit-lowering": dict(delta=2.0, theta_max=math.pi / 2, gamma=1.0, jump_frame="adiabatic",
                           schedule="flat-start-bump"),
    "qubit-pump": dict(delta=10.0, theta_max=math.pi / 2, gamma=16.0, jump_frame="adiabatic",
                       schedule="flat-start-bump"),
    "qubit-dephasing": dict(delta=2.0, theta_max=math.pi / 2, gamma=1.0, schedule="flat-start-bump"),
    "random-d3": dict(seed=7, coupling=0.4, gamma=1.0, n_jumps=2, schedule="flat-start-bump"),
}


def builtin_models(name: str, **params) -> LindbladModel:
    """Deterministic built-in models.

    qubit-sx
        H = (delta/2)(cos a sz + sin a sx), a = theta_max s(t), jump sqrt(gamma) sx.
    qubit-twist
        Same with a non-planar Bloch path (azimuth phi_max s(t)); default gap 4.
    qubit-lowering
        qubit-sx Hamiltonian with jump |1><2|.
    qubit-pump
        qubit-sx Hamiltonian with the instantaneous-basis pair sqrt(gamma) |1><2| and
        sqrt(gamma s(t)) |2><1|; the stationary populations (1, s)/(1 + s) move with
        the schedule while no coherences are generated.
    qubit-dephasing
        qubit-sx Hamiltonian with the dephasing jump sqrt(gamma) (2/delta) H(t).
    random-d3
        Seeded random three-level model (see :func:`random_model`).

    For the qubit models ``jump_frame='adiabatic'`` (default) carries the jump
    along with the eigenbasis of H(t), i.e. the listed matrix acts in the
    instantaneous basis {phi_1(t), phi_2(t)}; ``jump_frame='lab'`` keeps it fixed.
    """
    if name not in BUILTIN_DEFAULTS:
        raise ModelError(f"unknown built-in model {name!r}; known: {sorted(BUILTIN_DEFAULTS)}")
    p = {**BUILTIN_DEFAULTS[name], **params}
    unknown = set(p) - set(BUILTIN_DEFAULTS[name])
    if unknown:
        raise ModelError(f"unknown parameters for {name}: {sorted(unknown)}")
    if name == "random-d3":
        return random_model(3, p["seed"], p["coupling"], p["gamma"], p["n_jumps"], p["schedule"])
    jump = {"qubit-sx": "sx", "qubit-twist": "sx", "qubit-lowering": "lowering",
            "qubit-pump": "pump", "qubit-dephasing": "dephasing"}[name]
    return _qubit(name, p["delta"], p["theta_max"], p.get("phi_max", 0.0), p["gamma"], jump,
                  p.get("jump_frame", "adiabatic"), p["schedule"])


# -- configuration and sampled paths -------------------------------------------------------

def _matrix(obj) -> np.ndarray:
    if isinstance(obj, dict):
        return operator_from_json(obj)
    return np.asarray(obj, dtype=complex)


def model_from_config(cfg: dict) -> LindbladModel:
    """Build a model from a configuration tree.

    Either ``{builtin: name, params: {...}}`` or a custom model::

        dim: 2
        schedule: {kind: flat-start-bump}
        hamiltonian: {h0: M, h1: M}        # H(t) = h0 + s(t) h1
        hamiltonian_csv: path.csv          # alternative: sampled H(t)
        jumps: [{g0: M, g1: M}, ...]       # g1 optional

    Matrices are nested lists or ``{dim, entries: [[re, im], ...]}`` objects.
    """
    if not isinstance(cfg, dict):
        raise ModelError("model section must be a mapping")
    if "builtin" in cfg:
        return builtin_models(cfg["builtin"], **(cfg.get("params") or {}))
    sch_cfg = dict(cfg.get("schedule") or {"kind": "flat-start-bump"})
    sched = SmoothSchedule(**sch_cfg)
    if "hamiltonian_csv" in cfg:
        H = load_sampled_path(cfg["hamiltonian_csv"], hermitian=True)
    else:
        hc = cfg.get("hamiltonian")
        if not hc or "h0" not in hc:
            raise ModelError("custom model needs hamiltonian.h0")
        H0 = _matrix(hc["h0"])
        H1 = _matrix(hc.get("h1", np.zeros_like(H0)))
        H = OperatorPath.affine(H0, H1, sched, hermitian=True, name="H")
    if "dim" in cfg and int(cfg["dim"]) != H.dim:
        raise ModelError(f"dim={cfg['dim']} does not match the Hamiltonian dimension {H.dim}")
    jumps = []
    for jc in cfg.get("jumps") or []:
        G0 = _matrix(jc["g0"])
        G1 = _matrix(jc.get("g1", np.zeros_like(G0)))
        jumps.append(OperatorPath.affine(G0, G1, sched, name="jump"))
    return LindbladModel(cfg.get("name", "custom"), H, jumps, {"schedule": sched.kind},
                         cfg.get("gap_threshold"))


def load_sampled_path(path, hermitian: bool = False) -> OperatorPath:
    """Read a CSV with a time column followed by row-major (re, im) entry columns."""
    rows = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                rows.append([float(x) for x in row])
            except ValueError:
                continue  # header
    data = np.asarray(rows)
    if data.ndim != 2 or data.shape[1] < 3:
        raise ModelError(f"{path}: expected a time column plus [re, im] entry columns")
    n = (data.shape[1] - 1) // 2
    d = int(round(math.sqrt(n)))
    if d * d != n or 1 + 2 * n != data.shape[1]:
        raise ModelError(f"{path}: {data.shape[1] - 1} entry columns is not 2 d^2")
    t = data[:, 0]
    vals = data[:, 1::2] + 1j * data[:, 2::2]
    spline = CubicSpline(t, vals, axis=0)
    lo, hi = t[0], t[-1]
    return OperatorPath(lambda s: spline(min(max(s, lo), hi)).reshape(d, d), d,
                        hermitian=hermitian, name=Path(path).stem)


def write_sampled_path(path, times, mats) -> None:
    d = mats[0].shape[0]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t"] + [f"{p}{i}{j}" for i in range(d) for j in range(d) for p in ("re", "im")])
        for t, A in zip(times, mats):
            flat = np.asarray(A).ravel()
            w.writerow([repr(float(t))] + [repr(float(x)) for z in flat for x in (z.real, z.imag)])


def rotated_qubit_path(theta: Callable[[float], float]) -> OperatorPath:
    """H(t) = exp(-i theta sy/2) sz exp(+i theta sy/2)."""
    def H(t):
        R = expm(-0.5j * theta(t) * SY)
        return R @ SZ @ R.conj().T
    return OperatorPath(H, 2, hermitian=True, name="rotated")
