"""Experiment orchestration: replica farms, gates, and artifact emission.

Each experiment spawns independent replicas whose engine seeds are derived
from (master seed, replica index), merges the results single-threaded in
replica order, applies the experiment's acceptance gate, and emits
summary.json plus replicas.csv (and SVG plots when enabled).  Workers only
compute, so the artifacts are byte-identical for any worker count.

Exit codes: 0 all configured gates pass, 1 a gate fails, 2 the truncation
envelope was breached in strict mode, 3 artifact IO failed.
"""

from __future__ import annotations

import contextlib
import json
import math
import os
from dataclasses import dataclass
from multiprocessing import Pool

from .cayley_tree import ball_words, render_vertex
from .config import ExperimentConfig
from .environment import tagged_view, stationarity_check
from .graphical_sim import (
    SimParams,
    Simulation,
    TrajectorySample,
    TruncationBreachError,
    default_ball_radius,
    default_safety_margin,
    run,
)
from .kernel import speed
from .oracle import (
    TooManyVerticesError,
    build_exclusion_generator,
    build_finite_graph,
    check_detailed_balance,
    check_invariance,
)
from .rng import derive_seed
from .stats import clt_diagnostic, mean_ci, speed_estimate, variance_growth, zscore_report

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_TRUNCATION = 2
EXIT_IO = 3

STATIONARITY_RADIUS = 2
RESIDUAL_GATE = 1e-10


@dataclass(frozen=True)
class ExperimentResult:
    exit_code: int
    summary: dict
    artifacts: tuple[str, ...]


def _sim_params(config: ExperimentConfig, replica_index: int) -> SimParams:
    model = config.model
    t_end = config.times[-1] if config.times else 0.0
    radius = config.ball_radius
    if radius is None:
        radius = default_ball_radius(model, t_end)
    return SimParams(
        model=model,
        t_end=t_end,
        sample_times=config.times,
        ball_radius=radius,
        safety_margin=default_safety_margin(model, radius),
        seed=derive_seed(config.seed, replica_index),
        strict_boundary=config.strict_boundary,
    )


def _map(fn, tasks, workers: int) -> list:
    if workers <= 1 or len(tasks) <= 1:
        return [fn(task) for task in tasks]
    with Pool(processes=min(workers, len(tasks))) as pool:
        return pool.map(fn, tasks)


def _farm_trajectories(config: ExperimentConfig) -> list[list[TrajectorySample]]:
    tasks = [_sim_params(config, i) for i in range(config.replicas)]
    return _map(run, tasks, config.workers)


def _moment_row(values: list) -> dict:
    if len(values) >= 2:
        return mean_ci(values).as_dict()
    return {"n": len(values), "mean": float(values[0]), "se": None, "variance": None, "ci95": None}


def _timeseries(results: list[list[TrajectorySample]], times) -> list[dict]:
    rows = []
    for k, t in enumerate(times):
        rows.append(
            {
                "t": t,
                "horo": _moment_row([r[k].horo for r in results]),
                "depth": _moment_row([r[k].depth for r in results]),
                "drift_integral": _moment_row([r[k].drift_integral for r in results]),
                "breached": sum(1 for r in results if r[k].boundary_flag),
            }
        )
    return rows


def _run_simulate(config: ExperimentConfig):
    results = _farm_trajectories(config)
    body = {
        "timeseries": _timeseries(results, config.times),
        "reference_speed": speed(config.model),
    }
    return None, body, results


def _run_speed(config: ExperimentConfig):
    results = _farm_trajectories(config)
    t_final = config.times[-1]
    horos = [r[-1].horo for r in results]
    depths = [r[-1].depth for r in results]
    estimate = speed_estimate(t_final, horos, depths, v_ref=speed(config.model))
    body = {
        "speed": estimate,
        "reference_speed": speed(config.model),
        "timeseries": _timeseries(results, config.times),
    }
    return bool(estimate["horo"]["pass"]), body, results


def _run_clt(config: ExperimentConfig):
    results = _farm_trajectories(config)
    times = config.times
    t_final = times[-1]
    v = speed(config.model)
    horos_final = [r[-1].horo for r in results]
    diagnostic = clt_diagnostic(horos_final, t_final, v, config.model.d)
    passed = bool(diagnostic.get("pass", True))  # the d=2 skip is not a failure

    growth = None
    growth_ok = None
    k0 = next((k for k, t in enumerate(times) if 0.0 < t < t_final), None)
    if k0 is not None:
        horos_early = [r[k0].horo for r in results]
        growth = variance_growth(horos_early, times[k0], horos_final, t_final)
        if growth.get("degenerate"):
            growth_ok = False
        elif config.model.d == 2:
            growth_ok = bool(growth["below_reference"])
        else:
            growth_ok = bool(growth["contains_reference"])
        passed = passed and growth_ok

    body = {
        "clt": diagnostic,
        "variance_growth": growth,
        "variance_growth_pass": growth_ok,
        "reference_speed": v,
        "timeseries": _timeseries(results, times),
    }
    return passed, body, results


def _run_martingale(config: ExperimentConfig):
    results = _farm_trajectories(config)
    t_final = config.times[-1]
    deviations = [r[-1].horo - r[-1].drift_integral for r in results]
    report = zscore_report(mean_ci(deviations), 0.0)
    report["t"] = t_final
    body = {
        "martingale": report,
        "timeseries": _timeseries(results, config.times),
    }
    return bool(report["pass"]), body, results


def _stationarity_replica(task):
    params, radius = task
    sim = Simulation(params)
    words = ball_words(params.model.d, radius)
    samples = []
    rows = []
    for s in params.sample_times:
        sim.advance_to(s)
        samples.append(sim.sample())
        view = tagged_view(sim, radius)
        row = []
        for z in words:
            bit = view.occupancy.get(z)
            if bit is None:
                # relative site fell off the simulation ball: view unusable
                raise TruncationBreachError(
                    f"environment view clipped at t={s}; "
                    f"rerun with ball_radius >= {2 * params.ball_radius}"
                )
            row.append(bit)
        rows.append(tuple(row))
    return samples, rows


def _run_stationarity(config: ExperimentConfig):
    radius = STATIONARITY_RADIUS
    words = ball_words(config.model.d, radius)
    labels = [render_vertex(z) for z in words]
    tasks = [(_sim_params(config, i), radius) for i in range(config.replicas)]
    merged = _map(_stationarity_replica, tasks, config.workers)
    results = [samples for samples, _ in merged]
    counts = [[0] * len(words) for _ in config.times]
    for _, rows in merged:
        for k, row in enumerate(rows):
            for j, bit in enumerate(row):
                counts[k][j] += bit
    report = stationarity_check(labels, list(config.times), counts, config.replicas, config.model.rho)
    body = {
        "stationarity": report,
        "view_radius": radius,
        "timeseries": _timeseries(results, config.times),
    }
    return bool(report["pass"]), body, results


def _run_oracle(config: ExperimentConfig):
    model = config.model
    rhos = sorted({0.2, 0.5, 0.8} | {model.rho})
    entries = []
    all_ok = True
    computed = 0
    for radius in (1, 2):
        try:
            graph = build_finite_graph(model.d, radius, model.kernel)
            q = build_exclusion_generator(graph)
        except TooManyVerticesError as exc:
            entries.append({"radius": radius, "skipped": True, "reason": str(exc)})
            continue
        for rho in rhos:
            invariance = check_invariance(q, rho)
            balance = check_detailed_balance(q, rho)
            ok = invariance < RESIDUAL_GATE and balance < RESIDUAL_GATE
            computed += 1
            all_ok = all_ok and ok
            entries.append(
                {
                    "radius": radius,
                    "rho": rho,
                    "n_vertices": len(graph.vertices),
                    "invariance_residual": invariance,
                    "detailed_balance_residual": balance,
                    "tolerance": RESIDUAL_GATE,
                    "pass": ok,
                }
            )
    body = {"oracle": {"entries": entries, "tolerance": RESIDUAL_GATE}}
    return all_ok and computed > 0, body, None


_RUNNERS = {
    "simulate": _run_simulate,
    "speed": _run_speed,
    "clt": _run_clt,
    "martingale": _run_martingale,
    "stationarity": _run_stationarity,
    "oracle": _run_oracle,
}


def _write_csv(path: str, results: list[list[TrajectorySample]]) -> None:
    lines = ["replica,t,X,horo,depth,drift_integral,boundary_flag"]
    for ix, samples in enumerate(results):
        for s in samples:
            lines.append(
                f"{ix},{s.t!r},{render_vertex(s.tag)},{s.horo},{s.depth},"
                f"{s.drift_integral!r},{int(s.boundary_flag)}"
            )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _emit_plots(config: ExperimentConfig, summary: dict, results) -> list[str]:
    from . import plots  # matplotlib import deferred until needed

    out: list[str] = []
    times = [s.t for s in results[0]]
    if config.experiment in ("simulate", "speed", "martingale", "stationarity"):
        fan_path = os.path.join(config.out_dir, "trajectories.svg")
        plots.trajectory_fan(times, [[s.horo for s in r] for r in results], fan_path)
        out.append(fan_path)
        rows = summary.get("timeseries") or []
        if rows and all(row["horo"]["se"] is not None for row in rows):
            mean_path = os.path.join(config.out_dir, "mean_vs_reference.svg")
            plots.mean_drift_plot(
                [row["t"] for row in rows],
                [row["horo"]["mean"] for row in rows],
                [row["horo"]["se"] for row in rows],
                summary["reference_speed"],
                mean_path,
            )
            out.append(mean_path)
    if config.experiment == "clt":
        diagnostic = summary.get("clt") or {}
        sigma2 = diagnostic.get("sigma2_hat")
        if sigma2 and not diagnostic.get("skipped") and not diagnostic.get("degenerate"):
            t_final = times[-1]
            v = summary["reference_speed"]
            scale = math.sqrt(sigma2 * t_final)
            z = [(r[-1].horo - v * t_final) / scale for r in results]
            hist_path = os.path.join(config.out_dir, "clt_histogram.svg")
            plots.clt_histogram(z, hist_path)
            out.append(hist_path)
    return out


def _emit(config: ExperimentConfig, summary: dict, results) -> tuple[str, ...]:
    if config.out_dir is None:
        return ()
    os.makedirs(config.out_dir, exist_ok=True)
    artifacts = []
    summary_path = os.path.join(config.out_dir, "summary.json")
    with open(summary_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(summary, sort_keys=True, indent=2) + "\n")
    artifacts.append(summary_path)
    if results is not None:
        csv_path = os.path.join(config.out_dir, "replicas.csv")
        _write_csv(csv_path, results)
        artifacts.append(csv_path)
        if config.plots and results:
            artifacts.extend(_emit_plots(config, summary, results))
    return tuple(artifacts)


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run one configured experiment end to end; never raises for gate failures."""
    runner = _RUNNERS[config.experiment]
    try:
        passed, body, results = runner(config)
    except TruncationBreachError as exc:
        summary = {
            "experiment": config.experiment,
            "config": config.as_dict(),
            "error": f"truncation breach: {exc}",
            "pass": False,
            "exit_code": EXIT_TRUNCATION,
        }
        artifacts: tuple[str, ...] = ()
        with contextlib.suppress(OSError):
            artifacts = _emit(config, summary, None)
        return ExperimentResult(EXIT_TRUNCATION, summary, artifacts)

    ok = True if passed is None else bool(passed)
    exit_code = EXIT_OK if ok else EXIT_FAIL
    summary = {
        "experiment": config.experiment,
        "config": config.as_dict(),
        "pass": ok,
        "exit_code": exit_code,
    }
    summary.update(body)
    try:
        artifacts = _emit(config, summary, results)
    except OSError as exc:
        summary["error"] = f"artifact emission failed: {exc}"
        return ExperimentResult(EXIT_IO, summary, ())
    return ExperimentResult(exit_code, summary, artifacts)
