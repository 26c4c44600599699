"""Regime sweeps, convergence-exponent fits and the two-level analytic oracle."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import quad

from . import __version__
from .asymptotics import (LindbladSpectralFrame, perturbative_transition, splitting_matrix,
                          stationary_state, transition_regime_approx)
from .model import builtin_models, check_hypotheses, spectral_frame
from .operators import (apply_superop, induced_trace_norm, is_cptp, pinching_superop,
                        trace_norm)
from .propagators import (SuperadiabaticFrame, adiabatic_V, lindblad_U, schrodinger_U,
                          superadiabatic_Vhat)

SCHEMA_VERSION = 1
DEFAULT_EPS = (0.2, 0.14, 0.1, 0.07, 0.05, 0.035, 0.025)
PATHS = {"g=eps": 1.0, "g=eps^2": 2.0, "g=eps^3": 3.0, "g=eps^(2/3)": 2 / 3, "g=eps^(1/2)": 0.5}


class HypothesisError(RuntimeError):
    """The model violates a hypothesis required by the requested suite."""


class SymmetryError(ValueError):
    """The two-level symmetry condition |<1|G 2>|^2 = |<2|G 1>|^2 fails."""


# -- fitting ---------------------------------------------------------------------------

@dataclass
class FitResult:
    exponent: float
    intercept: float
    r2: float
    stderr: float
    n: int


def fit_rate(points) -> FitResult:
    """Least-squares line through (log param, log error); the slope is the exponent."""
    pts = np.asarray(list(points), dtype=float)
    if pts.ndim != 2 or len(pts) < 3:
        raise ValueError("fit_rate needs at least 3 points")
    x, y = pts[:, 0], pts[:, 1]
    if np.any(y <= 0) or np.any(x <= 0):
        raise ValueError("fit_rate needs positive parameters and errors")
    lx, ly = np.log(x), np.log(y)
    A = np.column_stack([lx, np.ones_like(lx)])
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ coef
    ss_res = float(resid @ resid)
    ss_tot = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res < 1e-24 else 0.0)
    n = len(x)
    if n > 2 and np.ptp(lx) > 0:
        s2 = ss_res / (n - 2)
        stderr = math.sqrt(s2 / float(((lx - lx.mean()) ** 2).sum()))
    else:
        stderr = float("nan")
    return FitResult(float(coef[0]), float(coef[1]), float(r2), float(stderr), n)


# -- two-level oracle --------------------------------------------------------------------

def qubit_gamma_path(model, frame=None, check_times=None, tol: float = 1e-10):
    """gamma(t) = sum_l |<phi_1|G_l phi_2>|^2 after verifying the symmetry condition."""
    frame = frame or spectral_frame(model.hamiltonian, np.linspace(0, 1, 201))
    check_times = np.linspace(0, 1, 21) if check_times is None else check_times
    for t in check_times:
        L = splitting_matrix(model, t, frame).matrix
        if abs(L[0, 1] - L[1, 0]) > tol:
            raise SymmetryError(f"symmetry condition fails at t={t}: {L[0, 1]} vs {L[1, 0]}")
    return lambda t: float(splitting_matrix(model, t, frame).matrix[0, 1])


def qubit_closed_form(gamma, delta: float, t: float, observable: str = "transition",
                      rho0=(1.0, 0.0), s: float = 0.0):
    """Two-level reduced dynamics in closed form.

    ``gamma`` is a constant or a callable rate.  observable='transition'
    returns 1/2 (1 - exp(-(2/delta) int_s^t gamma)); 'populations' returns
    the pair 1/2 (1 +- exp(...)(rho_1(0) - rho_2(0))); 'matrix' returns the
    population propagator.
    """
    if callable(gamma):
        integral = quad(gamma, s, t, limit=200, epsabs=1e-13, epsrel=1e-12)[0] if t > s else 0.0
    else:
        integral = float(gamma) * (t - s)
    decay = 1.0 if math.isinf(delta) else math.exp(-2.0 * integral / delta)
    if observable == "transition":
        return 0.5 * (1.0 - decay)
    if observable == "populations":
        diff = rho0[0] - rho0[1]
        return 0.5 * (1 + decay * diff), 0.5 * (1 - decay * diff)
    if observable == "matrix":
        return 0.5 * np.ones((2, 2)) + decay * 0.5 * np.array([[1.0, -1.0], [-1.0, 1.0]])
    raise ValueError(f"unknown observable {observable!r}")


# -- plans and reports ---------------------------------------------------------------------

@dataclass
class SweepPlan:
    """A sweep of one suite along a path g = amplitude * eps^exponent (or a g list)."""

    suite: str
    model: str
    params: dict = field(default_factory=dict)
    eps: tuple = DEFAULT_EPS
    path_exponent: float | None = None
    amplitude: float = 1.0
    g_values: tuple | None = None
    fixed_eps: float | None = None
    fixed_g: float | None = None
    times: tuple = (1.0,)
    expected: dict = field(default_factory=dict)   # observable -> (exponent, band, mode)
    min_points: int = 4
    min_r2: float = 0.9
    seed: int = 1234
    n_states: int = 200
    tol: float = 1e-10
    workers: int = 1

    def points(self):
        """Sweep points as (fit parameter, eps, g)."""
        if self.g_values is not None:
            eps = self.fixed_eps if self.fixed_eps is not None else 1.0
            return [(g, eps, g) for g in self.g_values]
        out = []
        for e in self.eps:
            if self.fixed_g is not None:
                g = self.fixed_g
            elif self.path_exponent is not None:
                g = self.amplitude * e ** self.path_exponent
            else:
                g = 0.0
            out.append((e, e, g))
        return out

    def as_dict(self) -> dict:
        d = asdict(self)
        d["eps"] = list(self.eps)
        d["times"] = list(self.times)
        d["g_values"] = None if self.g_values is None else list(self.g_values)
        d["expected"] = {k: list(v) for k, v in self.expected.items()}
        return d

    def digest(self) -> str:
        blob = json.dumps(self.as_dict(), sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:12]


@dataclass
class PointResult:
    param: float
    eps: float
    g: float
    t: float
    observable: str
    error: float
    extra: dict = field(default_factory=dict)


@dataclass
class FitReport:
    observable: str
    t: float
    expected: float
    band: float
    mode: str
    fit: FitResult | None
    status: str  # pass / fail / inconclusive
    note: str = ""


@dataclass
class RegimeReport:
    plan: SweepPlan
    points: list
    fits: list
    failures: list
    baseline: dict
    runtime: float  # wall-clock seconds; kept out of the files so they stay reproducible
    config: dict | None = None

    @property
    def failed(self) -> bool:
        return any(f.status == "fail" for f in self.fits) or bool(self.failures) or \
            self.baseline.get("ok") is False

    @property
    def passed(self) -> bool:
        return not self.failed and bool(self.fits) and all(f.status == "pass" for f in self.fits)

    @property
    def inconclusive(self) -> bool:
        return any(f.status == "inconclusive" for f in self.fits)

    def fit_for(self, observable: str, t: float | None = None) -> FitReport:
        for f in self.fits:
            if f.observable == observable and (t is None or abs(f.t - t) < 1e-12):
                return f
        raise KeyError((observable, t))

    def errors(self, observable: str, t: float | None = None):
        return [(p.param, p.error) for p in self.points
                if p.observable == observable and (t is None or abs(p.t - t) < 1e-12)]

    def to_json(self) -> str:
        obj = {
            "schema_version": SCHEMA_VERSION,
            "package_version": __version__,
            "plan": self.plan.as_dict(),
            "points": [asdict(p) for p in self.points],
            "fits": [{**asdict(f), "fit": None if f.fit is None else asdict(f.fit)} for f in self.fits],
            "failures": self.failures,
            "baseline": self.baseline,
            "passed": self.passed,
            "failed": self.failed,
        }
        if self.config is not None:
            obj["config"] = self.config
        return json.dumps(obj, indent=2, sort_keys=True, default=_jsonable)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["schema_version", "suite", "epsilon", "g", "t", "observable", "error"])
        for p in self.points:
            w.writerow([SCHEMA_VERSION, self.plan.suite, repr(p.eps), repr(p.g), repr(p.t),
                        p.observable, repr(p.error)])
        return buf.getvalue()

    def summary(self) -> str:
        lines = [f"suite {self.plan.suite} on {self.plan.model}  ({len(self.points)} points)"]
        lines.append(f"{'observable':<22}{'t':>6}{'exponent':>11}{'stderr':>9}{'r2':>8}"
                     f"{'expected':>10}{'band':>7}  status")
        for f in self.fits:
            if f.fit is None:
                lines.append(f"{f.observable:<22}{f.t:>6.2f}{'-':>11}{'-':>9}{'-':>8}"
                             f"{f.expected:>10.3f}{f.band:>7.2f}  {f.status} {f.note}")
            else:
                lines.append(f"{f.observable:<22}{f.t:>6.2f}{f.fit.exponent:>11.4f}{f.fit.stderr:>9.4f}"
                             f"{f.fit.r2:>8.4f}{f.expected:>10.3f}{f.band:>7.2f}  {f.status} {f.note}")
        for msg in self.failures:
            lines.append(f"point failure: {msg}")
        if self.baseline:
            lines.append(f"baseline: {self.baseline}")
        return "\n".join(lines)

    def write(self, out_dir, stem: str | None = None) -> dict:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        stem = stem or f"{self.plan.model}_sweep-{self.plan.suite}_{self.plan.digest()}"
        paths = {"json": out_dir / f"{stem}.json", "csv": out_dir / f"{stem}.csv",
                 "txt": out_dir / f"{stem}.txt"}
        paths["json"].write_text(self.to_json())
        paths["csv"].write_text(self.to_csv())
        paths["txt"].write_text(self.summary() + "\n")
        return paths


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, complex):
        return [x.real, x.imag]
    return str(x)


# -- point evaluators -------------------------------------------------------------------------

def _model(plan: SweepPlan):
    return builtin_models(plan.model, **plan.params)


def _time_grid(times, n: int = 101):
    grid = np.union1d(np.linspace(0.0, 1.0, n), np.asarray(times, float))
    return grid


def _check_baseline(tab, tol_trace=1e-8, tol_cp=1e-6) -> dict:
    worst_cp, worst_tr = float("inf"), 0.0
    for S in tab.mats[1:]:
        rep = is_cptp(S, tol_cp)
        worst_cp = min(worst_cp, rep.min_choi_eig)
        worst_tr = max(worst_tr, rep.trace_deficit)
    return {"min_choi_eig": worst_cp, "trace_deficit": worst_tr,
            "ok": bool(worst_cp >= -tol_cp and worst_tr <= tol_trace)}


def _sup_norm(A, B) -> float:
    return float(max(np.linalg.norm(a - b, 2) for a, b in zip(A, B)))


def point_adiabatic(plan, param, eps, g):
    m = _model(plan)
    grid = np.linspace(0.0, 1.0, 101)
    frame = spectral_frame(m.hamiltonian, grid, m.gap_threshold)
    U = schrodinger_U(m, eps, grid, plan.tol)
    V = adiabatic_V(frame, eps, grid, plan.tol)
    out = [PointResult(param, eps, g, 1.0, "U-V", _sup_norm(U.mats, V.mats))]
    sa = SuperadiabaticFrame(frame, eps, 1)
    Vh = superadiabatic_Vhat(sa, grid, plan.tol)
    out.append(PointResult(param, eps, g, 1.0, "U-Vhat1", _sup_norm(U.mats, Vh.mats)))
    kd = max(np.linalg.norm(lv[1][2] - lv[0][2], 2) for lv in (sa.levels(t) for t in grid))
    out.append(PointResult(param, eps, g, 1.0, "K1-K0", float(kd)))
    return out, {}


def point_perturbative(plan, param, eps, g):
    m = _model(plan)
    frame = spectral_frame(m.hamiltonian, np.linspace(0, 1, 201), m.gap_threshold)
    times = sorted(plan.times)
    L = lindblad_U(m, eps, g, [0.0] + times, plan.tol)
    rho = frame.at(0.0)[1][0]
    out = []
    for t in times:
        state = apply_superop(L.at(t), rho)
        p = float(np.trace(frame.at(t)[1][1] @ state).real)
        f = perturbative_transition(m, eps, g, t, 0, 1, rho, frame)
        out.append(PointResult(param, eps, g, t, "dyson2-residual", abs(p - f.total),
                               {"simulated": p, "hamiltonian_term": f.hamiltonian_term,
                                "dissipator_term": f.dissipator_term}))
    return out, _check_baseline(L)


def point_transition(plan, param, eps, g):
    m = _model(plan)
    grid = _time_grid(plan.times, 11)
    frame = spectral_frame(m.hamiltonian, np.linspace(0, 1, 201), m.gap_threshold)
    L = lindblad_U(m, eps, g, grid, plan.tol)
    approx = transition_regime_approx(m, eps, g, grid, frame)
    P00 = pinching_superop(frame.at(0.0)[1])
    out = []
    rho = frame.at(0.0)[1][0]
    for t in plan.times:
        err = induced_trace_norm(L.at(t) @ P00 - approx.at(t), plan.n_states, plan.seed)
        p = float(np.trace(frame.at(t)[1][1] @ apply_superop(L.at(t), rho)).real)
        out.append(PointResult(param, eps, g, t, "U P0 - W0 Psi P0", err, {"transition_probability": p}))
    return out, _check_baseline(L)


def point_slow_drive(plan, param, eps, g):
    m = _model(plan)
    frame = spectral_frame(m.hamiltonian, np.linspace(0, 1, 201), m.gap_threshold)
    times = sorted(plan.times)
    L = lindblad_U(m, eps, g, [0.0] + times, plan.tol)
    rho = frame.at(0.0)[1][0]
    out = []
    for t in times:
        state = apply_superop(L.at(t), rho)
        nu, _ = stationary_state(splitting_matrix(m, t, frame))
        out.append(PointResult(param, eps, g, t, "U(P1) - nu0", trace_norm(state - nu),
                               {"max_entry_dev": float(np.max(np.abs(state - nu))),
                                "budget": g ** 2 / eps + eps / g}))
    return out, _check_baseline(L)


def point_coherence(plan, param, eps, g):
    m = _model(plan)
    frame = spectral_frame(m.hamiltonian, np.linspace(0, 1, 201), m.gap_threshold)
    times = sorted(plan.times)
    L = lindblad_U(m, eps, g, [0.0] + times, plan.tol)
    L0 = lindblad_U(m, eps, 0.0, [0.0] + times, plan.tol)
    rho = frame.at(0.0)[1][0]
    out = []
    for t in times:
        diff = apply_superop(L.at(t) - L0.at(t), rho)
        P = frame.at(t)[1]
        coh = sum(trace_norm(P[n] @ diff @ P[k]) for n in range(len(P)) for k in range(len(P)) if n != k)
        out.append(PointResult(param, eps, g, t, "coherence", float(coh),
                               {"correction_norm": trace_norm(diff)}))
    return out, _check_baseline(L)


def point_spectral(plan, param, eps, g):
    m = _model(plan)
    frame = spectral_frame(m.hamiltonian, np.linspace(0, 1, 201), m.gap_threshold)
    lf = LindbladSpectralFrame(m, g, np.asarray(plan.times, float), frame)
    out = []
    for t in plan.times:
        sp = lf.at(t)
        L = m.lindbladian(t, g)
        pinned = max(np.linalg.norm(L @ sp.right[:, 0]), np.linalg.norm(sp.left[:, 0].conj() @ L))
        rest = np.linalg.eigvals(L)
        out.append(PointResult(param, eps, g, t, "lambda/g - lambda~", float(np.max(lf.ratio_residuals(t))),
                               {"pinned_residual": float(pinned), "max_real": float(np.max(rest.real)),
                                "max_real_labeled": float(np.max(sp.eigenvalues.real))}))
    return out, {}


SUITES = {
    "adiabatic": point_adiabatic,
    "perturbative": point_perturbative,
    "transition": point_transition,
    "slow-drive": point_slow_drive,
    "coherence": point_coherence,
    "spectral": point_spectral,
}

REQUIRED_HYPOTHESES = {
    "adiabatic": ("reg_flat_start", "spec_gap"),
    "perturbative": ("reg_flat_start", "spec_gap"),
    "transition": ("reg_flat_start", "spec_gap"),
    "slow-drive": ("reg_flat_start", "gen", "split"),
    "coherence": ("reg_flat_start", "spec_gap"),
    "spectral": ("gen", "split"),
}


def default_plan(suite: str, **overrides) -> SweepPlan:
    """Default plans: model, path, evaluation times and tolerance bands per suite."""
    base = {
        "adiabatic": dict(model="qubit-sx", expected={"U-V": (1.0, 0.15, "band"),
                                                      "U-Vhat1": (2.0, 0.2, "band"),
                                                      "K1-K0": (1.0, 0.2, "band")}),
        "perturbative": dict(model="qubit-twist", path_exponent=3.0, times=(0.5,),
                             expected={"dyson2-residual": (3.0, 0.3, "band")}),
        "transition": dict(model="qubit-sx", path_exponent=1.0, times=(0.5, 1.0),
                           expected={"U P0 - W0 Psi P0": (1.0, 0.2, "band")}),
        "slow-drive": dict(model="qubit-pump", path_exponent=2 / 3, times=(1.0,),
                           expected={"U(P1) - nu0": (1 / 3, 0.15, "band")}),
        "coherence": dict(model="qubit-sx", path_exponent=2.0, times=(0.5, 1.0),
                          expected={"coherence": (1.8, 0.0, "min")}),
        "spectral": dict(model="random-d3", g_values=(0.02, 0.01, 0.005), times=(0.5,),
                         min_points=3, expected={"lambda/g - lambda~": (1.0, 0.3, "band")}),
    }
    if suite not in base:
        raise KeyError(f"unknown suite {suite!r}; known: {sorted(base)}")
    cfg = {**base[suite], **overrides}
    return SweepPlan(suite=suite, **cfg)


def _run_point(args):
    plan, param, eps, g = args
    try:
        pts, baseline = SUITES[plan.suite](plan, param, eps, g)
        return pts, baseline, None
    except Exception as exc:  # collected per point, the suite continues
        return [], {}, f"eps={eps:g} g={g:g}: {type(exc).__name__}: {exc}"


def _judge(expected, band, mode, fit) -> bool:
    if mode == "min":
        return fit.exponent >= expected
    return abs(fit.exponent - expected) <= band


def run_regime_suite(plan: SweepPlan, check: bool = True) -> RegimeReport:
    """Evaluate every sweep point, fit exponents and grade them against the bands."""
    if plan.suite not in SUITES:
        raise KeyError(f"unknown suite {plan.suite!r}")
    start = time.perf_counter()
    if check:
        rep = check_hypotheses(_model(plan))
        missing = [h for h in REQUIRED_HYPOTHESES[plan.suite] if not getattr(rep, h)]
        if missing:
            raise HypothesisError(f"{plan.model}: hypotheses {missing} fail for suite {plan.suite}: "
                                  f"{rep.as_dict()}")
    jobs = [(plan, param, eps, g) for param, eps, g in plan.points()]
    if plan.workers > 1:
        with ProcessPoolExecutor(plan.workers) as pool:
            results = list(pool.map(_run_point, jobs))
    else:
        results = [_run_point(j) for j in jobs]
    points, failures = [], []
    baseline = {}
    for pts, base, err in results:
        points.extend(pts)
        if err:
            failures.append(err)
        if base:
            baseline = {"min_choi_eig": min(baseline.get("min_choi_eig", float("inf")), base["min_choi_eig"]),
                        "trace_deficit": max(baseline.get("trace_deficit", 0.0), base["trace_deficit"]),
                        "ok": baseline.get("ok", True) and base["ok"]}
    fits = []
    for obs, (expected, band, mode) in plan.expected.items():
        for t in sorted({p.t for p in points if p.observable == obs}):
            data = [(p.param, p.error) for p in points if p.observable == obs and p.t == t]
            fit, status, note = None, "inconclusive", ""
            if baseline and not baseline["ok"]:
                note = "baseline violates CPTP/trace invariants; fit aborted"
            elif len(data) < plan.min_points:
                note = f"only {len(data)} points (< {plan.min_points})"
            elif any(e <= 0 for _, e in data):
                note = "non-positive error values"
            else:
                fit = fit_rate(data)
                if fit.r2 < plan.min_r2:
                    note = f"r2 {fit.r2:.3f} < {plan.min_r2}"
                else:
                    status = "pass" if _judge(expected, band, mode, fit) else "fail"
            fits.append(FitReport(obs, t, expected, band, mode, fit, status, note))
    return RegimeReport(plan, points, fits, failures, baseline, time.perf_counter() - start)


def coherence_decay_suite(model: str = "qubit-sx", path_exponent: float = 2.0, **overrides) -> RegimeReport:
    """Off-diagonal blocks of (U - U0)(rho_j) along g = eps^path_exponent."""
    plan = default_plan("coherence", model=model, path_exponent=path_exponent, **overrides)
    return run_regime_suite(plan)


# -- structural battery ------------------------------------------------------------------------

@dataclass
class InvariantRow:
    name: str
    value: float
    tol: float
    ok: bool


def structural_suite(models=("qubit-sx", "random-d3"), eps=DEFAULT_EPS, paths=None,
                     tol: float = 1e-8, n_times: int = 11) -> list:
    """Trace, Choi, intertwining and factorization checks over the (eps, g) grid.

    Every path of ``paths`` (default: all of :data:`PATHS`) is swept along
    ``eps``; the Kato and adiabatic checks are done once per model and eps.
    """
    from .operators import conj_superop
    from .propagators import dynamical_phase, factorized_V, intertwining_residual, kato_W, superop_kato_W0

    paths = PATHS if paths is None else paths
    grid = np.linspace(0.0, 1.0, n_times)
    rows = []
    for name in models:
        m = builtin_models(name)
        frame = spectral_frame(m.hamiltonian, np.linspace(0.0, 1.0, 201), m.gap_threshold)
        cp_worst, tr_worst = float("inf"), 0.0
        for e in eps:
            for a in paths.values():
                tab = lindblad_U(m, e, e ** a, grid, tol)
                for S in tab.mats[1:]:
                    rep = is_cptp(S, 1e-6)
                    cp_worst = min(cp_worst, rep.min_choi_eig)
                    tr_worst = max(tr_worst, rep.trace_deficit)
        rows.append(InvariantRow(f"{name}: Choi min eigenvalue", cp_worst, -1e-6, cp_worst >= -1e-6))
        rows.append(InvariantRow(f"{name}: trace deficit", tr_worst, 1e-8, tr_worst <= 1e-8))
        W = kato_W(frame, grid)
        res = intertwining_residual(W, lambda t: frame.at(t)[1])
        rows.append(InvariantRow(f"{name}: Kato intertwining", res, 1e-6, res <= 1e-6))
        W0 = superop_kato_W0(frame, grid)
        P00 = pinching_superop(frame.at(0.0)[1])
        dev = max(np.linalg.norm((W0.at(t) - conj_superop(W.at(t))) @ P00, 2) for t in grid)
        rows.append(InvariantRow(f"{name}: W0 = W.W* on Ran P0", float(dev), 1e-6, bool(dev <= 1e-6)))
        vdev = 0.0
        for e in (eps[0], eps[len(eps) // 2], eps[-1]):
            V = adiabatic_V(frame, e, grid, 1e-11)
            WPhi = factorized_V(W, dynamical_phase(frame, e, grid))
            vdev = max(vdev, _sup_norm(V.mats, WPhi))
        rows.append(InvariantRow(f"{name}: V = W Phi W^-1", vdev, 1e-6, bool(vdev <= 1e-6)))
    return rows
