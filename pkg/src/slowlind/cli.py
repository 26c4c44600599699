"""Command-line entry point.

Exit codes: 0 ok, 1 configuration, 2 integration, 3 hypothesis, 4 invariant.
Configuration is a YAML tree merged over the embedded defaults, then over
``SLOWLIND_*`` environment variables (``__`` separates nesting levels, e.g.
``SLOWLIND_MODEL__BUILTIN=qubit-lowering``), then over command-line flags.
"""
from __future__ import annotations

import copy
import hashlib
import json
import os
import sys
from pathlib import Path

import click
import numpy as np
import yaml

from . import __version__
from .asymptotics import (InvariantError, markov_generator, perturbative_transition,
                          reduced_dynamics, splitting_matrix, stationary_state)
from .experiments import (SCHEMA_VERSION, HypothesisError, default_plan, qubit_closed_form,
                          run_regime_suite, SUITES)
from .model import ModelError, check_hypotheses, model_from_config, spectral_frame
from .operators import (ContractViolation, InvalidInputError, apply_superop, conj_superop,
                        is_cptp, pinching_superop, trace_deficit)
from .propagators import (GapCollapseError, IntegrationError, adiabatic_V, dynamical_phase,
                          factorized_V, intertwining_residual, kato_W, lindblad_U, schrodinger_U,
                          superop_kato_W0)

EXIT_OK, EXIT_CONFIG, EXIT_INTEGRATION, EXIT_HYPOTHESIS, EXIT_INVARIANT = 0, 1, 2, 3, 4
ENV_PREFIX = "SLOWLIND_"

DEFAULTS = {
    "model": {"builtin": "qubit-sx", "params": {}},
    "eps": 0.1,
    "g": 0.01,
    "delta": 1.0,
    "t": 1.0,
    "q": 1,
    "N": 2,
    "n_times": 101,
    "initial_level": 0,
    "tol": 1e-10,
    "seed": 1234,
    "out": "slowlind-out",
    "approximants": ["adiabatic"],
    "hypotheses": ["reg_flat_start", "spec_gap"],
    "sweep": {},
    "validate": {"eps": [0.2, 0.05], "g": [0.0, 0.01, 0.2], "cp_tol": 1e-6, "trace_tol": 1e-8,
                 "intertwining_tol": 1e-6, "markov_tol": 1e-12, "splitting_override": None},
    "workers": 1,
}

APPROXIMANTS = {"adiabatic": (), "perturbative": (), "reduced": (), "slow-drive": ("gen", "split")}


class ConfigError(ValueError):
    """Malformed configuration; the message carries the source line when known."""


# -- configuration ---------------------------------------------------------------------------

def _line_map(text: str) -> dict:
    """Map dotted key paths of a YAML document to 1-based source lines."""
    lines = {}

    def walk(node, prefix):
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                key = f"{prefix}{k.value}"
                lines[key] = k.start_mark.line + 1
                walk(v, key + ".")
        elif isinstance(node, yaml.SequenceNode):
            for i, v in enumerate(node.value):
                lines[f"{prefix}{i}"] = v.start_mark.line + 1
                walk(v, f"{prefix}{i}.")
    root = yaml.compose(text)
    if root is not None:
        walk(root, "")
    return lines


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def _merge_config(base: dict, over: dict) -> dict:
    """Like :func:`_merge`, but a model section naming a different kind of model replaces the old one."""
    new_model = over.get("model")
    if isinstance(new_model, dict) and isinstance(base.get("model"), dict):
        if ("builtin" in new_model) != ("builtin" in base["model"]):
            base = {**base, "model": {}}
    return _merge(base, over)


def _env_overrides(environ=None) -> dict:
    environ = os.environ if environ is None else environ
    over: dict = {}
    for key, raw in environ.items():
        if not key.startswith(ENV_PREFIX):
            continue
        path = [p.lower() for p in key[len(ENV_PREFIX):].split("__") if p]
        if not path:
            continue
        node = over
        for p in path[:-1]:
            node = node.setdefault(p, {})
        node[path[-1]] = yaml.safe_load(raw)
    # env keys are case-folded; restore the one upper-case default key
    if "n" in over:
        over["N"] = over.pop("n")
    return over


def load_config(path=None, overrides=None, environ=None) -> tuple[dict, dict]:
    """Resolved configuration and its line map (empty without a file)."""
    cfg = copy.deepcopy(DEFAULTS)
    lines: dict = {}
    src = "<config>"
    if path is not None:
        src = str(path)
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"{path}: cannot read config: {exc}") from exc
        try:
            data = yaml.safe_load(text) or {}
            lines = _line_map(text)
        except yaml.MarkedYAMLError as exc:
            mark = exc.problem_mark
            line = mark.line + 1 if mark is not None else "?"
            raise ConfigError(f"{path}:{line}: YAML syntax error: {exc.problem}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}:1: top level must be a mapping")
        unknown = sorted(set(data) - set(DEFAULTS))
        if unknown:
            raise ConfigError(f"{path}:{lines.get(unknown[0], '?')}: unknown key {unknown[0]!r}")
        cfg = _merge_config(cfg, data)
    cfg = _merge_config(cfg, _env_overrides(environ))
    cfg = _merge(cfg, {k: v for k, v in (overrides or {}).items() if v is not None})
    validate_config(cfg, lines, src)
    return cfg, lines


def validate_config(cfg: dict, lines: dict, src: str = "<config>") -> None:
    def fail(key, msg):
        raise ConfigError(f"{src}:{lines.get(key, '?')}: {key}: {msg}")

    for key in ("eps", "tol", "t"):
        v = cfg[key]
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0:
            fail(key, f"must be a positive number, got {v!r}")
    if not isinstance(cfg["g"], (int, float)) or cfg["g"] < 0:
        fail("g", f"must be a non-negative number, got {cfg['g']!r}")
    if not isinstance(cfg["delta"], (int, float)) or not cfg["delta"] > 0:
        fail("delta", f"must be positive, got {cfg['delta']!r}")
    if cfg["t"] > 1:
        fail("t", "must lie in (0, 1]")
    for key, lo in (("q", 0), ("N", 0), ("n_times", 2), ("seed", 0), ("workers", 1), ("initial_level", 0)):
        v = cfg[key]
        if not isinstance(v, int) or isinstance(v, bool) or v < lo:
            fail(key, f"must be an integer >= {lo}, got {v!r}")
    bad = [a for a in cfg["approximants"] if a not in APPROXIMANTS]
    if bad:
        fail("approximants", f"unknown approximant {bad[0]!r}; known {sorted(APPROXIMANTS)}")
    if not isinstance(cfg["model"], dict):
        fail("model", "must be a mapping")
    custom = {"dim", "hamiltonian", "hamiltonian_csv", "jumps", "schedule"} & set(cfg["model"])
    if "builtin" in cfg["model"] and custom:
        fail("model", f"builtin model cannot be combined with custom keys {sorted(custom)}")


def config_hash(cfg: dict) -> str:
    relevant = {k: v for k, v in cfg.items() if k not in ("out", "workers")}
    return hashlib.sha256(json.dumps(relevant, sort_keys=True, default=str).encode()).hexdigest()[:10]


def _model_name(cfg) -> str:
    return str(cfg["model"].get("builtin") or cfg["model"].get("name", "custom"))


def _stem(cfg, command) -> str:
    return f"{_model_name(cfg)}_{command}_eps{cfg['eps']:g}_g{cfg['g']:g}_{config_hash(cfg)}"


def _build_model(cfg):
    try:
        return model_from_config(cfg["model"])
    except (ModelError, InvalidInputError, KeyError, TypeError) as exc:
        raise ConfigError(f"model: {exc}") from exc


def _require(model, names, grid=None):
    if not names:
        return None
    rep = check_hypotheses(model, grid)
    missing = [n for n in names if not getattr(rep, n)]
    if missing:
        raise HypothesisError(f"hypotheses {missing} fail for {model.name}: {rep.as_dict()}")
    return rep


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_plain) + "\n")


def _plain(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, complex):
        return [x.real, x.imag]
    return str(x)


# -- commands ------------------------------------------------------------------------------------

def cmd_simulate(cfg: dict, quiet: bool = False) -> int:
    model = _build_model(cfg)
    needed = list(cfg["hypotheses"])
    for a in cfg["approximants"]:
        needed += [h for h in APPROXIMANTS[a] if h not in needed]
    _require(model, needed)
    eps, g, t_end, tol = float(cfg["eps"]), float(cfg["g"]), float(cfg["t"]), float(cfg["tol"])
    times = np.linspace(0.0, t_end, cfg["n_times"])
    frame = spectral_frame(model.hamiltonian, np.linspace(0.0, 1.0, 201), model.gap_threshold)
    tab = lindblad_U(model, eps, g, times, tol)
    j = cfg["initial_level"]
    P0 = frame.at(0.0)[1]
    if j >= len(P0):
        raise ConfigError(f"initial_level {j} exceeds the number of levels {len(P0)}")
    rho = P0[j] / np.trace(P0[j]).real
    final = apply_superop(tab.final, rho)
    Pt = frame.at(t_end)[1]
    rep = is_cptp(tab.final, 1e-6)
    summary = {
        "schema_version": SCHEMA_VERSION,
        "package_version": __version__,
        "command": "simulate",
        "config": cfg,
        "model": model.name,
        "populations": [float(np.trace(P @ final).real) for P in Pt],
        "final_state": final,
        "trace_deficit": rep.trace_deficit,
        "min_choi_eig": rep.min_choi_eig,
        "integrator_error_estimate": tab.error_estimate,
        "steps": tab.n_steps,
        "approximants": {},
    }
    if "adiabatic" in cfg["approximants"]:
        U0 = schrodinger_U(model, eps, times, tol)
        psi = U0.final @ rho @ U0.final.conj().T
        summary["approximants"]["adiabatic"] = [float(np.trace(P @ psi).real) for P in Pt]
    if "perturbative" in cfg["approximants"] and len(P0) > 1:
        k = 1 if j == 0 else 0
        pt = perturbative_transition(model, eps, g, t_end, j, k, rho, frame)
        summary["approximants"]["perturbative"] = {"target_level": k, "total": pt.total,
                                                   "hamiltonian_term": pt.hamiltonian_term,
                                                   "dissipator_term": pt.dissipator_term}
    if "reduced" in cfg["approximants"] and g > 0:
        red = reduced_dynamics(model, eps / g, times, frame)
        summary["approximants"]["reduced"] = red.pop[-1][:, j]
    if "slow-drive" in cfg["approximants"]:
        nu, c = stationary_state(splitting_matrix(model, t_end, frame))
        summary["approximants"]["slow-drive"] = c
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    stem = _stem(cfg, "simulate")
    tab.to_csv(out / f"{stem}.csv")
    _write_json(out / f"{stem}.summary.json", summary)
    if not quiet:
        click.echo(f"populations at t={t_end:g}: " + ", ".join(f"{p:.6f}" for p in summary["populations"]))
        for k, v in summary["approximants"].items():
            click.echo(f"  {k}: {v}")
        click.echo(f"wrote {out / stem}.csv and .summary.json")
    return EXIT_OK


def cmd_sweep(cfg: dict, suite: str, quiet: bool = False) -> int:
    if suite not in SUITES:
        raise ConfigError(f"unknown suite {suite!r}; known: {sorted(SUITES)}")
    opts = dict(cfg.get("sweep") or {})
    opts.setdefault("seed", cfg["seed"])
    opts.setdefault("workers", cfg["workers"])
    if "builtin" in cfg["model"] and cfg["model"].get("builtin") != DEFAULTS["model"]["builtin"]:
        opts.setdefault("model", cfg["model"]["builtin"])
        opts.setdefault("params", cfg["model"].get("params") or {})
    for key in ("eps", "times", "g_values"):
        if key in opts and opts[key] is not None:
            opts[key] = tuple(opts[key])
    if "expected" in opts:
        opts["expected"] = {k: tuple(v) for k, v in opts["expected"].items()}
    try:
        plan = default_plan(suite, **opts)
    except TypeError as exc:
        raise ConfigError(f"sweep: {exc}") from exc
    report = run_regime_suite(plan)
    report.config = cfg
    out = Path(cfg["out"])
    stem = f"{plan.model}_sweep-{suite}_{config_hash(cfg)}"
    paths = report.write(out, stem)
    if not quiet:
        click.echo(report.summary())
        click.echo(f"runtime {report.runtime:.1f} s; wrote {paths['json']}")
    if report.inconclusive:
        click.echo("warning: some fits are inconclusive", err=True)
    return EXIT_INVARIANT if report.failed else EXIT_OK


def cmd_validate(cfg: dict, quiet: bool = False) -> int:
    model = _build_model(cfg)
    vc = _merge(DEFAULTS["validate"], cfg.get("validate") or {})
    rows = []

    def record(name, value, ok, tol):
        rows.append((name, value, "n/a" if ok is None else ("pass" if ok else "FAIL"), tol))

    grid = np.linspace(0.0, 1.0, 21)
    frame = spectral_frame(model.hamiltonian, np.linspace(0.0, 1.0, 201), model.gap_threshold)
    dissipative = bool(model.jumps) and float(cfg["g"]) > 0
    g_values = vc["g"] if dissipative else [0.0]
    for eps in vc["eps"]:
        for g in g_values:
            if g > 0 and not model.jumps:
                record(f"CPTP eps={eps:g} g={g:g}", None, None, vc["cp_tol"])
                continue
            tab = lindblad_U(model, eps, g, grid, cfg["tol"])
            cp = min(is_cptp(S, vc["cp_tol"]).min_choi_eig for S in tab.mats)
            tr = max(trace_deficit(S) for S in tab.mats)
            record(f"choi min eig eps={eps:g} g={g:g}", cp, cp >= -vc["cp_tol"], -vc["cp_tol"])
            record(f"trace deficit eps={eps:g} g={g:g}", tr, tr <= vc["trace_tol"], vc["trace_tol"])
    W = kato_W(frame, grid)
    res = intertwining_residual(W, lambda t: frame.at(t)[1])
    record("Kato intertwining", res, res <= vc["intertwining_tol"], vc["intertwining_tol"])
    eps = vc["eps"][-1]
    V = adiabatic_V(frame, eps, grid, cfg["tol"])
    res_v = intertwining_residual(V, lambda t: frame.at(t)[1])
    record(f"V intertwining eps={eps:g}", res_v, res_v <= vc["intertwining_tol"], vc["intertwining_tol"])
    if frame.singleton:
        WPhi = factorized_V(W, dynamical_phase(frame, eps, grid))
        dev = float(max(np.linalg.norm(a - b, 2) for a, b in zip(V.mats, WPhi)))
        record(f"V = W Phi W^-1 eps={eps:g}", dev, dev <= vc["intertwining_tol"], vc["intertwining_tol"])
    W0 = superop_kato_W0(frame, grid)
    dev = max(np.linalg.norm((W0.at(t) - conj_superop(W.at(t))) @ pinching_superop(frame.at(0.0)[1]), 2)
              for t in grid)
    record("W0 = W-conjugation on Ran P0", dev, dev <= vc["intertwining_tol"], vc["intertwining_tol"])
    tol_m = vc["markov_tol"]
    if vc.get("splitting_override") is not None:
        Ls = [np.asarray(vc["splitting_override"], dtype=float)]
    elif dissipative:
        Ls = [splitting_matrix(model, t, frame).matrix for t in grid]
    else:
        Ls = []
    if Ls:
        col = max(float(np.max(np.abs(L.sum(axis=0)))) for L in Ls)
        off = min(float(np.min(L[~np.eye(len(L), dtype=bool)])) if len(L) > 1 else 0.0 for L in Ls)
        record("L~ column sums", col, col <= tol_m, tol_m)
        record("L~ off-diagonal min", off, off >= -tol_m, -tol_m)
        if vc.get("splitting_override") is None:
            for delta in (0.1, 1.0, 10.0):
                red = reduced_dynamics(model, delta, grid, frame)
                dev = float(np.max(np.abs(red.pop.sum(axis=1) - 1.0)))
                neg = float(np.min(red.pop))
                ok = dev <= 1e-10 and neg >= -1e-10
                record(f"reduced dynamics stochastic delta={delta:g}", max(dev, max(-neg, 0.0)), ok, 1e-10)
    else:
        for name in ("L~ column sums", "L~ off-diagonal min", "reduced dynamics stochastic"):
            record(name, None, None, tol_m)
    if not quiet:
        click.echo(f"{'invariant':<44}{'value':>14}{'tol':>11}  status")
        for name, value, status, tol in rows:
            v = "-" if value is None else f"{value:.3e}"
            click.echo(f"{name:<44}{v:>14}{tol:>11.1e}  {status}")
    return EXIT_INVARIANT if any(r[2] == "FAIL" for r in rows) else EXIT_OK


def cmd_qubit_demo(cfg: dict, quiet: bool = False) -> int:
    """Simulated transition probability of qubit-sx against the closed form."""
    mcfg = cfg["model"] if cfg["model"].get("builtin", "").startswith("qubit") else {"builtin": "qubit-sx"}
    model = _build_model({**cfg, "model": mcfg})
    _require(model, ["spec_gap", "gen", "split"])
    eps, g = float(cfg["eps"]), float(cfg["g"])
    if g <= 0:
        raise ConfigError("qubit-demo needs g > 0")
    frame = spectral_frame(model.hamiltonian, np.linspace(0.0, 1.0, 201), model.gap_threshold)
    from .experiments import qubit_gamma_path
    gamma = qubit_gamma_path(model, frame)
    times = np.linspace(0.0, float(cfg["t"]), 11)
    tab = lindblad_U(model, eps, g, times, cfg["tol"])
    rho = frame.at(0.0)[1][0]
    rows = []
    for t in times:
        p = float(np.trace(frame.at(t)[1][1] @ apply_superop(tab.at(t), rho)).real)
        rows.append((float(t), p, qubit_closed_form(gamma, eps / g, float(t))))
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    stem = _stem(cfg, "qubit-demo")
    with open(out / f"{stem}.csv", "w") as fh:
        fh.write(f"# schema_version={SCHEMA_VERSION}\nt,simulated,closed_form\n")
        for r in rows:
            fh.write(f"{r[0]!r},{r[1]!r},{r[2]!r}\n")
    if not quiet:
        click.echo(f"{'t':>6}{'simulated':>14}{'closed form':>14}")
        for t, p, c in rows:
            click.echo(f"{t:>6.2f}{p:>14.6f}{c:>14.6f}")
    return EXIT_OK


def cmd_export_markov(cfg: dict, quiet: bool = False) -> int:
    model = _build_model(cfg)
    _require(model, ["spec_gap"])
    if not model.jumps:
        raise ConfigError("export-markov needs a model with jump operators")
    times = np.linspace(0.0, 1.0, cfg["n_times"])
    table = markov_generator(model, times)
    d = table.rates.shape[1]
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{_model_name(cfg)}_export-markov_{config_hash(cfg)}"
    with open(out / f"{stem}.csv", "w") as fh:
        fh.write(f"# schema_version={SCHEMA_VERSION}\n")
        fh.write(",".join(["t"] + [f"q{a}{b}" for a in range(d) for b in range(d)]) + "\n")
        for t, Q in zip(table.times, table.rates):
            fh.write(",".join([repr(float(t))] + [repr(float(x)) for x in Q.ravel()]) + "\n")
    _write_json(out / f"{stem}.json", {"schema_version": SCHEMA_VERSION, "config": cfg,
                                       "dim": d, "times": table.times, "rates": table.rates,
                                       "max_row_sum": table.max_row_sum(),
                                       "min_offdiag": table.min_offdiag()})
    if not quiet:
        click.echo(f"wrote {d}x{d} rate matrices at {len(times)} times to {out / stem}.csv")
    return EXIT_OK


# -- click wiring --------------------------------------------------------------------------------

def _run(fn, *args, **kwargs) -> int:
    try:
        return fn(*args, **kwargs)
    except (ConfigError, ModelError, InvalidInputError) as exc:
        click.echo(f"config error: {exc}", err=True)
        return EXIT_CONFIG
    except (IntegrationError, GapCollapseError) as exc:
        click.echo(f"integration error: {exc}", err=True)
        return EXIT_INTEGRATION
    except HypothesisError as exc:
        click.echo(f"hypothesis check failed: {exc}", err=True)
        return EXIT_HYPOTHESIS
    except (InvariantError, ContractViolation) as exc:
        click.echo(f"invariant violated: {exc}", err=True)
        return EXIT_INVARIANT


def _print_defaults(ctx, _param, value):
    if value and not ctx.resilient_parsing:
        click.echo(yaml.safe_dump(DEFAULTS, sort_keys=True), nl=False)
        ctx.exit(0)


def _common(f):
    opts = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
                     help="YAML configuration file."),
        click.option("--out", default=None, help="Output directory."),
        click.option("--seed", type=int, default=None, help="Random seed."),
        click.option("--tol", type=float, default=None, help="Integrator tolerance."),
        click.option("--eps", type=float, default=None, help="Adiabatic parameter."),
        click.option("--g", "g", type=float, default=None, help="Coupling constant."),
        click.option("--model", "model_name", default=None, help="Built-in model name."),
        click.option("--quiet", is_flag=True, help="Suppress console output."),
    ]
    for o in reversed(opts):
        f = o(f)
    return f


def _resolve(config_path, out, seed, tol, eps, g, model_name):
    over = {"out": out, "seed": seed, "tol": tol, "eps": eps, "g": g}
    if model_name:
        over["model"] = {"builtin": model_name, "params": {}}
    cfg, _ = load_config(config_path, over)
    if model_name:
        cfg["model"] = {"builtin": model_name, "params": {}}
    return cfg


def _entry(fn, config_path, out, seed, tol, eps, g, model_name, quiet, *extra):
    try:
        cfg = _resolve(config_path, out, seed, tol, eps, g, model_name)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    sys.exit(_run(fn, cfg, *extra, quiet=quiet))


@click.group()
@click.version_option(__version__)
@click.option("--print-defaults", is_flag=True, expose_value=False, is_eager=True,
              callback=_print_defaults, help="Dump the embedded default configuration.")
def main():
    """Simulate slowly driven Lindblad dynamics and validate asymptotic approximants."""


@main.command()
@_common
def simulate(config_path, out, seed, tol, eps, g, model_name, quiet):
    """Integrate the Lindblad propagator and write tables plus a state summary."""
    _entry(cmd_simulate, config_path, out, seed, tol, eps, g, model_name, quiet)


@main.command()
@_common
@click.option("--suite", required=True, help=f"One of: {', '.join(sorted(SUITES))}.")
def sweep(config_path, out, seed, tol, eps, g, model_name, quiet, suite):
    """Run a convergence suite and write JSON/CSV/text reports."""
    _entry(cmd_sweep, config_path, out, seed, tol, eps, g, model_name, quiet, suite)


@main.command()
@_common
def validate(config_path, out, seed, tol, eps, g, model_name, quiet):
    """Run the invariant battery on the configured model."""
    _entry(cmd_validate, config_path, out, seed, tol, eps, g, model_name, quiet)


@main.command("qubit-demo")
@_common
def qubit_demo(config_path, out, seed, tol, eps, g, model_name, quiet):
    """Compare the simulated qubit transition probability with the closed form."""
    _entry(cmd_qubit_demo, config_path, out, seed, tol, eps, g, model_name, quiet)


@main.command("export-markov")
@_common
def export_markov(config_path, out, seed, tol, eps, g, model_name, quiet):
    """Export the transposed splitting matrices as Markov rate matrices."""
    _entry(cmd_export_markov, config_path, out, seed, tol, eps, g, model_name, quiet)


@main.command("print-defaults")
def print_defaults():
    """Dump the embedded default configuration."""
    click.echo(yaml.safe_dump(DEFAULTS, sort_keys=True), nl=False)


if __name__ == "__main__":
    main()
