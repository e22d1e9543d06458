"""Scenario runners behind the command line: spectra, equilibrium sweeps and
time evolution, each returning a ResultTable.

Sweep points run on a process pool whose size is capped by the
``STRONGBATH_THREADS`` environment variable. Results are assembled in grid
order, so the table does not depend on the number of workers.
"""

from __future__ import annotations

import logging
import math
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import __version__, linalg, models, observables, plotting, redfield, spectral
from .config import RunConfig
from .errors import ConfigInvalid
from .tables import ResultTable

log = logging.getLogger(__name__)

_KETS = {
    "up": linalg.UP,
    "down": linalg.DOWN,
    "plus": (linalg.UP + linalg.DOWN) / math.sqrt(2.0),
    "minus": (linalg.UP - linalg.DOWN) / math.sqrt(2.0),
}


def worker_count() -> int:
    env = os.environ.get("STRONGBATH_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigInvalid(f"STRONGBATH_THREADS must be an integer, got {env!r}") from None
        if n < 1:
            raise ConfigInvalid("STRONGBATH_THREADS must be at least 1")
        return n
    return os.cpu_count() or 1


def _map(fn: Callable, tasks: Sequence, workers: Optional[int]) -> list:
    n = min(workers or worker_count(), len(tasks))
    if n <= 1:
        return [fn(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, *zip(*tasks)))


def _meta(cfg: RunConfig, **extra) -> dict:
    m = {"config": cfg.to_dict(), "config_digest": cfg.digest(), "version": __version__}
    m.update(extra)
    return m


# -- spectrum ------------------------------------------------------------------------


def run_spectrum(cfg: RunConfig) -> ResultTable:
    """Closed-form effective eigenvalues over the coupling grid (two spins)."""
    if cfg.N != 2:
        raise ConfigInvalid(f"spectrum needs two spins, got {cfg.N}")
    if not cfg.lambdas:
        raise ConfigInvalid("spectrum needs a lambda grid")
    t0 = time.perf_counter()
    table = ResultTable(["lambda", "w_mm", "w_mp", "w_pm", "w_pp"])
    d1, d2 = cfg.deltas
    for lam in cfg.lambdas:
        w = models.effective_eigenvalue_table(d1, d2, lam, cfg.Omega)
        table.append([lam, w["mm"], w["mp"], w["pm"], w["pp"]])
    table.meta = _meta(cfg, wall_time=time.perf_counter() - t0)
    return table


# -- equilibrium sweep ---------------------------------------------------------------


def _model(cfg_dict: dict, method: str, lam: float):
    cfg = RunConfig.from_dict(cfg_dict)
    sys = models.SpinSystem(cfg.deltas)
    if method == "rc":
        return models.build_rc(sys, lam, cfg.Omega, cfg.M)
    if method == "eff":
        return models.build_effective(sys, lam, cfg.Omega)
    return models.build_bare(sys)


def _steady_point(cfg_dict: dict, lam: float, T: float, method: str):
    model = _model(cfg_dict, method, lam)
    sys = model.system
    n_obs = sys.N + 1 + (2 if sys.N == 2 else 0)
    try:
        rho = observables.equilibrium_state(model, 1.0 / T)
        vals = [observables.average_magnetization(rho, sys)]
        vals += [observables.polarization(rho, sys, i) for i in range(sys.N)]
        if sys.N == 2:
            vals += [observables.qmi(rho), observables.negativity(rho)]
        return vals, ""
    except Exception as exc:  # recorded per point; the sweep continues
        return [math.nan] * n_obs, f"{type(exc).__name__}: {exc}"


def run_steady_sweep(cfg: RunConfig, workers: Optional[int] = None) -> ResultTable:
    """Equilibrium observables at every (lambda, T, method) grid point."""
    if cfg.scenario != "steady-sweep":
        raise ConfigInvalid(f"run_steady_sweep got scenario {cfg.scenario!r}")
    t0 = time.perf_counter()
    cols = ["lambda", "T", "method", "mag"] + [f"sz{i + 1}" for i in range(cfg.N)]
    if cfg.N == 2:
        cols += ["qmi", "neg"]
    cols.append("warnings")
    grid = [(lam, T, m) for lam in cfg.lambdas for T in cfg.temperatures for m in cfg.methods]
    cfg_dict = cfg.to_dict()
    results = _map(_steady_point, [(cfg_dict, *p) for p in grid], workers)
    table = ResultTable(cols)
    for (lam, T, m), (vals, warn) in zip(grid, results):
        table.append([lam, T, m, *vals, warn])
    table.meta = _meta(cfg, wall_time=time.perf_counter() - t0)
    return table


# -- dynamics ------------------------------------------------------------------------


def initial_spin_state(tokens: Sequence[str]) -> np.ndarray:
    try:
        kets = [_KETS[t] for t in tokens]
    except KeyError as exc:
        raise ConfigInvalid(f"unknown initial-state token {exc.args[0]!r}") from None
    return linalg.ket_to_dm(linalg.kron(*kets))


def rc_thermal_state(Omega: float, M: int, beta: float) -> np.ndarray:
    a = linalg.destroy(M)
    return linalg.gibbs_state(Omega * a.conj().T @ a, beta)


def _suffix(cfg: RunConfig, lam: float, T: float) -> str:
    if len(cfg.lambdas) * len(cfg.temperatures) == 1:
        return ""
    return f"_lam{lam:g}_T{T:g}"


def _dynamics_point(cfg_dict: dict, lam: float, T: float, method: str):
    cfg = RunConfig.from_dict(cfg_dict)
    beta = 1.0 / T
    sys = models.SpinSystem(cfg.deltas)
    rho_s = initial_spin_state(cfg.initial_state)
    names = cfg.observables or [f"sz{i + 1}" for i in range(sys.N)]
    obs = observables.spin_observables(sys, names)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        if method == "weak":
            J = spectral.BrownianSpectralDensity(cfg.gamma, cfg.Omega, lam)
            traj = redfield.weak_coupling_dynamics(
                sys, J, beta, rho_s, cfg.t_max, n_points=cfg.n_points, observables=obs
            )
        else:
            model = _model(cfg_dict, method, lam)
            J = spectral.OhmicExpSpectralDensity(cfg.gamma, cfg.Lambda)
            rho0 = rho_s
            if method == "rc":
                rho0 = np.kron(rho_s, rc_thermal_state(cfg.Omega, cfg.M, beta))
            gen = redfield.build_generator(model, J, beta)
            traj = redfield.propagate(
                gen, rho0, cfg.t_max, n_points=cfg.n_points, reduce=model.reduce, observables=obs
            )
    diag = {
        "trace_error": float(np.max(traj.trace_error)),
        "hermiticity_error": float(np.max(traj.hermiticity_error)),
        "min_eigenvalue": float(np.min(traj.min_eigenvalue)),
        "steps": int(traj.steps),
        "warnings": [str(w.message) for w in caught],
    }
    return traj.times, {n: traj.observables[n] for n in names}, diag


def run_dynamics(cfg: RunConfig, workers: Optional[int] = None) -> ResultTable:
    """Time series of the requested observables for every method and grid
    point, on a shared uniform time grid."""
    if cfg.scenario not in ("dynamics", "sweep-dynamics"):
        raise ConfigInvalid(f"run_dynamics got scenario {cfg.scenario!r}")
    if cfg.scenario == "dynamics" and len(cfg.lambdas) * len(cfg.temperatures) > 1:
        raise ConfigInvalid("scenario dynamics takes a single lambda and T; use sweep-dynamics")
    t0 = time.perf_counter()
    grid = [(lam, T, m) for lam in cfg.lambdas for T in cfg.temperatures for m in cfg.methods]
    cfg_dict = cfg.to_dict()
    results = _map(_dynamics_point, [(cfg_dict, *p) for p in grid], workers)

    times = results[0][0]
    cols, data, diagnostics = ["t"], [times], {}
    for (lam, T, m), (_t, series, diag) in zip(grid, results):
        suffix = _suffix(cfg, lam, T)
        for name, vals in series.items():
            cols.append(f"{m}_{name}{suffix}")
            data.append(vals)
        diagnostics[f"{m}{suffix}"] = diag
    table = ResultTable(cols, [list(r) for r in np.column_stack(data)])
    table.meta = _meta(cfg, wall_time=time.perf_counter() - t0, diagnostics=diagnostics)
    return table


# -- entry point ---------------------------------------------------------------------


RUNNERS = {
    "spectrum": run_spectrum,
    "steady-sweep": run_steady_sweep,
    "dynamics": run_dynamics,
    "sweep-dynamics": run_dynamics,
}


def run(cfg: RunConfig, workers: Optional[int] = None) -> ResultTable:
    runner = RUNNERS[cfg.scenario]
    if runner is run_spectrum:
        return runner(cfg)
    return runner(cfg, workers=workers)


def default_plot_spec(cfg: RunConfig, table: ResultTable) -> dict:
    """Plot layout from the config's ``plot`` section with per-scenario fallbacks."""
    spec = dict(cfg.plot)
    if cfg.scenario == "spectrum":
        spec.setdefault("x", "lambda")
        spec.setdefault("y", ["w_mm", "w_mp", "w_pm", "w_pp"])
    elif cfg.scenario == "steady-sweep":
        spec.setdefault("x", "lambda")
        spec.setdefault("y", ["mag"])
        spec.setdefault("group_by", ["method", "T"])
    else:
        spec.setdefault("x", "t")
        spec.setdefault("y", [c for c in table.columns if c != "t"])
    return spec


def plot_table(cfg: RunConfig, table: ResultTable, out) -> str:
    spec = default_plot_spec(cfg, table)
    markers = []
    if spec.get("period_markers"):
        if cfg.N != 2:
            raise ConfigInvalid("period markers need two spins")
        dw = models.sync_frequency(cfg.deltas[0], cfg.deltas[1], cfg.lambdas[0], cfg.Omega)
        x_max = float(np.nanmax(table.column(spec["x"])))
        markers = plotting.period_markers(2.0 * math.pi / dw, x_max)
    return plotting.emit_plot(
        table,
        spec["x"],
        y=spec.get("y"),
        out=out,
        panels=spec.get("panels"),
        group_by=spec.get("group_by", ()),
        markers=markers,
        title=spec.get("title"),
    )


def execute(cfg: RunConfig, workers: Optional[int] = None) -> ResultTable:
    """Run the scenario and write the CSV and SVG outputs named in ``cfg``."""
    table = run(cfg, workers=workers)
    if cfg.output_csv:
        table.write(cfg.output_csv)
        log.info("wrote %s", cfg.output_csv)
    if cfg.output_svg:
        plot_table(cfg, table, Path(cfg.output_svg))
        log.info("wrote %s", cfg.output_svg)
    return table
