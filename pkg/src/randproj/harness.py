"""Experiment generation, Monte-Carlo orchestration, and file output.

Builds random weighted-L1-over-ball-intersection instances whose global
constraint intersection is nonempty by construction, runs seeded
Monte-Carlo samplings of either algorithm (optionally across worker
processes), estimates the optimal value with an independent centralized
method, and writes the delimited outputs:

``trajectory.csv``
    header ``sampling,k,user,F,D``, one row per recorded iteration and
    user, floats with 17 significant digits.
``summary.csv``
    header ``k,user,F_mean,D_mean``, pointwise means over samplings.
``groups.csv``
    header ``group,F_G,D_G``, final-iteration group sums averaged over
    samplings.
``run.json``
    deterministic manifest (configuration echo, stream ids, instance
    fingerprint, diagnostics).
"""

import concurrent.futures
import dataclasses
import hashlib
import json
import math
import os

import numpy as np

from . import engine, metrics
from .config import ExperimentConfig, save_config
from .convex import StepSizeSchedule
from .engine import AlgorithmKind, ProblemInstance
from .errors import ConfigurationError, FeasibilityError, InputError
from .network import check_strong_connectivity, validate_weights
from .convex import Ball, WeightedL1
from .sampling import RngStream

__all__ = [
    "generate_instance",
    "instance_fingerprint",
    "OracleSolution",
    "centralized_oracle",
    "RunResult",
    "run_experiment",
    "CompareResult",
    "compare_schedules",
    "validate_setup",
]

CENTER_SHRINK = 0.9  # centers land within this fraction of each radius of the anchor
MAX_CENTER_ATTEMPTS = 100


def generate_instance(config, seed, sampling=0):
    """Draw a random problem instance with a guaranteed common point.

    A hidden anchor is drawn uniformly in ``[-1, 1]^d`` first; every
    ball center is then the anchor plus a uniform offset inside
    ``0.9 * radius``, clamped coordinate-wise into the configured center
    range, so the anchor lies in every component. Each user receives
    ``dimension`` ball components, matching the weighted-L1 benchmark
    family. Draw order (one ``instance`` stream): anchor, then per user
    its objective weights, anchors, and radii, then its centers.

    The anchor is recorded on the instance for verification only.
    """
    d = config.dimension
    m = config.users
    stream = RngStream(seed, "instance", sampling=sampling)
    a_lo, a_hi = config.a_range
    b_lo, b_hi = config.b_range
    r_lo, r_hi = config.r_range
    c_lo, c_hi = config.center_range()
    anchor = stream.uniform(-1.0, 1.0, d)
    objectives = []
    constraints = []
    for _ in range(m):
        # objective weights in (lo, hi], the rest in [lo, hi)
        a = a_hi - stream.uniform(0.0, 1.0, d) * (a_hi - a_lo)
        b = stream.uniform(b_lo, b_hi, d)
        r = stream.uniform(r_lo, r_hi, d)
        objectives.append(WeightedL1(a, b))
        balls = []
        for j in range(d):
            center = None
            for _ in range(MAX_CENTER_ATTEMPTS):
                direction = stream.standard_normal(d)
                norm = float(np.linalg.norm(direction))
                if norm == 0.0:
                    continue
                length = CENTER_SHRINK * r[j] * float(stream.uniform(0.0, 1.0)) ** (1.0 / d)
                candidate = np.clip(anchor + direction * (length / norm), c_lo, c_hi)
                if float(np.linalg.norm(anchor - candidate)) <= r[j]:
                    center = candidate
                    break
            if center is None:
                raise ConfigurationError(
                    f"center ranges ({c_lo:g}, {c_hi:g}) leave the anchor outside "
                    f"a radius-{r[j]:g} ball after {MAX_CENTER_ATTEMPTS} attempts"
                )
            balls.append(Ball(center, r[j]))
        constraints.append(balls)
    return ProblemInstance(objectives, constraints, anchor=anchor)


def instance_fingerprint(problem):
    """SHA-256 over the instance's defining arrays, for audit and pairing."""
    h = hashlib.sha256()
    h.update(f"{problem.m},{problem.dimension}".encode())
    h.update(problem.weight_rows.tobytes())
    h.update(problem.anchor_rows.tobytes())
    h.update(problem.flat_centers.tobytes())
    h.update(problem.flat_radii.tobytes())
    h.update(str(problem.partition.index_sets).encode())
    return h.hexdigest()


@dataclasses.dataclass
class OracleSolution:
    """Centralized estimate of the optimal value and a feasible minimizer."""

    value: float
    minimizer: np.ndarray
    method: str
    diagnostics: dict


def _restore_feasibility(x, centers, radii, tol, max_sweeps, center_sq=None):
    """Cyclic projections in ascending component order until all residuals <= tol."""
    if center_sq is None:
        center_sq = np.sum(centers * centers, axis=1)
    limit_sq = (radii + tol) ** 2
    sweeps = 0
    while True:
        dist_sq = center_sq - 2.0 * (centers @ x) + float(x @ x)
        if np.all(dist_sq <= limit_sq):
            return x, sweeps
        if sweeps >= max_sweeps:
            worst = float(np.sqrt(np.maximum(dist_sq, 0.0)).max() - radii.min())
            raise FeasibilityError(
                f"feasibility restoration stalled: residual about {worst:.3e} "
                f"after {sweeps} sweeps"
            )
        for idx in np.nonzero(dist_sq > radii**2)[0]:
            delta = x - centers[idx]
            dist = float(np.linalg.norm(delta))
            if dist > radii[idx]:
                x = centers[idx] + delta * (radii[idx] / dist)
        sweeps += 1


def centralized_oracle(
    problem,
    budget,
    step_scale=0.1,
    feasibility_tol=1e-10,
    max_restore_sweeps=10_000,
):
    """Independent estimate of the optimal value of the whole problem.

    A single-point subgradient method on the summed objective with
    exact feasibility restoration: after each step
    ``x <- x - step_scale/sqrt(k+1) * g`` the point is pushed back into
    every component by cyclic projections until all residuals are below
    ``feasibility_tol``, and the best feasible iterate by objective
    value is kept. Starts from the instance's recorded anchor when
    present. Uses only the closed-form primitives, never the
    distributed iteration engines. Intended for desk-scale instances
    (dimension <= 20, a few hundred components).
    """
    budget = int(budget)
    if budget < 1:
        raise InputError(f"budget must be at least 1, got {budget}")
    centers = problem.flat_centers
    radii = problem.flat_radii
    center_sq = np.sum(centers * centers, axis=1)
    if problem.anchor is not None:
        x = problem.anchor.copy()
    else:
        x = np.zeros(problem.dimension)
    x, _ = _restore_feasibility(
        x, centers, radii, feasibility_tol, max_restore_sweeps, center_sq
    )
    a_rows = problem.weight_rows
    b_rows = problem.anchor_rows
    best_x = x.copy()
    best_f = problem.objective_sum(x)
    total_sweeps = 0
    inv_sqrt = step_scale / np.sqrt(np.arange(1, budget + 1, dtype=float))
    for k in range(budget):
        diff = x[None, :] - b_rows
        g = np.sum(a_rows * np.sign(diff), axis=0)
        x = x - inv_sqrt[k] * g
        x, sweeps = _restore_feasibility(
            x, centers, radii, feasibility_tol, max_restore_sweeps, center_sq
        )
        total_sweeps += sweeps
        fx = float(np.sum(a_rows * np.abs(x[None, :] - b_rows)))
        if fx < best_f:
            best_f = fx
            best_x = x.copy()
    residual = float(
        (np.linalg.norm(best_x[None, :] - centers, axis=1) - radii).max()
    )
    return OracleSolution(
        value=best_f,
        minimizer=best_x,
        method="subgradient-with-cyclic-restoration",
        diagnostics={
            "budget": budget,
            "step_scale": step_scale,
            "max_constraint_residual": residual,
            "restoration_sweeps": total_sweeps,
        },
    )


def _fmt(value):
    return format(float(value), ".17g")


def _write_lines(path, lines):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line)
            fh.write("\n")


def _sampling_task(args):
    (problem, topology, weights, base, exponent, kind_value, iterations,
     box, seed, record_every, sampling) = args
    records, state = engine.run(
        problem,
        topology,
        weights,
        StepSizeSchedule(base, exponent),
        AlgorithmKind(kind_value),
        iterations,
        initial_box=box,
        seed=seed,
        record_every=record_every,
        sampling=sampling,
    )
    return sampling, records, state.estimates


@dataclasses.dataclass
class RunResult:
    out_dir: str
    trajectory_path: str
    summary_path: str
    groups_path: str
    manifest_path: str
    group_table: list
    records: list
    final_estimates: list
    instance: ProblemInstance


def run_experiment(config, problem=None, plots=False):
    """Run all samplings of one configured experiment and write outputs.

    One instance is shared across samplings by default (each sampling
    re-randomizes only the initial points and constraint draws); with
    ``reuse_instance = false`` every sampling draws its own instance. A
    pre-built ``problem`` may be supplied to pair runs across calls.
    Samplings are independent and run across ``config.workers``
    processes; outputs are byte-identical for any worker count.
    """
    config.validate()
    topology, weights, w_min = config.build_network()
    violations = validate_weights(weights, topology, w_min=w_min)
    if violations:
        raise ConfigurationError(
            "invalid mixing weights: " + "; ".join(violations[:5])
        )
    if not check_strong_connectivity([topology], 1):
        raise ConfigurationError("communication graph is not strongly connected")

    if problem is not None:
        problems = [problem] * config.samplings
    elif config.reuse_instance:
        problems = [generate_instance(config, config.seed)] * config.samplings
    else:
        problems = [
            generate_instance(config, config.seed, sampling=s)
            for s in range(1, config.samplings + 1)
        ]

    tasks = [
        (
            problems[s - 1],
            topology,
            weights,
            config.alpha0,
            config.exponent,
            config.algorithm.value,
            config.iterations,
            config.initial_box,
            config.seed,
            config.record_every,
            s,
        )
        for s in range(1, config.samplings + 1)
    ]
    if config.workers > 1 and config.samplings > 1:
        with concurrent.futures.ProcessPoolExecutor(
            max_workers=config.workers
        ) as pool:
            outcomes = list(pool.map(_sampling_task, tasks))
        outcomes.sort(key=lambda item: item[0])
    else:
        outcomes = [_sampling_task(t) for t in tasks]

    records_by_sampling = [records for _, records, _ in outcomes]
    final_estimates = [final for _, _, final in outcomes]

    os.makedirs(config.out_dir, exist_ok=True)
    trajectory_path = os.path.join(config.out_dir, "trajectory.csv")
    summary_path = os.path.join(config.out_dir, "summary.csv")
    groups_path = os.path.join(config.out_dir, "groups.csv")
    manifest_path = os.path.join(config.out_dir, "run.json")

    m = config.users
    lines = ["sampling,k,user,F,D"]
    for s, records in enumerate(records_by_sampling, start=1):
        for rec in records:
            for i in range(m):
                lines.append(
                    f"{s},{rec.k},{i + 1},{_fmt(rec.objective[i])},{_fmt(rec.feasibility[i])}"
                )
    _write_lines(trajectory_path, lines)

    ks = [rec.k for rec in records_by_sampling[0]]
    objective_stack = np.array(
        [[rec.objective for rec in records] for records in records_by_sampling]
    )
    feasibility_stack = np.array(
        [[rec.feasibility for rec in records] for records in records_by_sampling]
    )
    mean_objective = objective_stack.mean(axis=0)
    mean_feasibility = feasibility_stack.mean(axis=0)
    lines = ["k,user,F_mean,D_mean"]
    for ki, k in enumerate(ks):
        for i in range(m):
            lines.append(
                f"{k},{i + 1},{_fmt(mean_objective[ki, i])},{_fmt(mean_feasibility[ki, i])}"
            )
    _write_lines(summary_path, lines)

    group_table = None
    if m % 3 == 0:
        per_sampling = [
            metrics.group_aggregates(records[-1]) for records in records_by_sampling
        ]
        n_groups = len(per_sampling[0])
        group_table = []
        for gi in range(n_groups):
            f_mean = float(np.mean([rows[gi][1] for rows in per_sampling]))
            d_mean = float(np.mean([rows[gi][2] for rows in per_sampling]))
            group_table.append((gi + 1, f_mean, d_mean))
        lines = ["group,F_G,D_G"]
        for g, f_g, d_g in group_table:
            lines.append(f"{g},{_fmt(f_g)},{_fmt(d_g)}")
        _write_lines(groups_path, lines)
    else:
        groups_path = None

    diagnostics = []
    if config.final_distance_diagnostic:
        for s, final in enumerate(final_estimates, start=1):
            est = metrics.approx_distance_to_intersection(
                problems[s - 1], metrics.mean_point(final)
            )
            diagnostics.append(
                {
                    "sampling": s,
                    "mean_point_distance_bound": est.value,
                    "sweeps": est.sweeps,
                    "converged": est.converged,
                }
            )

    manifest = {
        "configuration": _config_dict(config),
        "algorithm": config.algorithm.value,
        "schedule": config.schedule().label(),
        "instance_fingerprints": sorted(
            {instance_fingerprint(p) for p in problems}
        ),
        "stream_ids": {
            "instance": "(0, sampling, 0)",
            "initial_points": "(1, sampling, user)",
            "constraint_draws": "(2, sampling, user)",
            "oracle": "(3, 0, 0)",
        },
        "recorded_iterations": ks,
        "distance_diagnostic": {
            "note": (
                "cyclic-projection upper bound on distance to the intersection; "
                "a surrogate, not an exact distance"
            ),
            "per_sampling": diagnostics,
        },
        "outputs": {
            "trajectory": "trajectory.csv",
            "summary": "summary.csv",
            "groups": "groups.csv" if groups_path else None,
        },
    }
    with open(manifest_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    save_config(config, os.path.join(config.out_dir, "config.ini"))

    result = RunResult(
        out_dir=config.out_dir,
        trajectory_path=trajectory_path,
        summary_path=summary_path,
        groups_path=groups_path,
        manifest_path=manifest_path,
        group_table=group_table,
        records=records_by_sampling,
        final_estimates=final_estimates,
        instance=problems[0],
    )
    if plots:
        from . import viz

        viz.plot_run(config.out_dir)
    return result


def _config_dict(config):
    out = dataclasses.asdict(config)
    out["algorithm"] = config.algorithm.value
    out.pop("topology", None)
    out.pop("weights", None)
    for key in ("a_range", "b_range", "r_range", "c_range", "initial_box"):
        if out[key] is not None:
            out[key] = list(out[key])
    return out


@dataclasses.dataclass
class CompareResult:
    out_dir: str
    comparison_path: str
    manifest_path: str
    labels: list
    rows: list           # (group, F_G per schedule ..., D_G per schedule ...)
    run_results: list
    totals: list         # (label, total F_G, total D_G)


def compare_schedules(config, schedules, plots=False):
    """Run the experiment once per schedule with paired seeds.

    Every schedule column shares the master seed, hence the same
    instance, initial points, and constraint draws; only the step sizes
    differ. Writes ``comparison.csv`` with per-group ``F_G``/``D_G``
    columns side by side.
    """
    schedules = [
        s if isinstance(s, StepSizeSchedule) else StepSizeSchedule(*s)
        for s in schedules
    ]
    if len(schedules) < 2:
        raise InputError("need at least two schedules to compare")
    config.validate()
    os.makedirs(config.out_dir, exist_ok=True)
    shared_problem = (
        generate_instance(config, config.seed) if config.reuse_instance else None
    )
    results = []
    labels = []
    for idx, schedule in enumerate(schedules, start=1):
        sub = dataclasses.replace(
            config,
            alpha0=schedule.base,
            exponent=schedule.exponent,
            out_dir=os.path.join(config.out_dir, f"schedule_{idx:02d}"),
        )
        results.append(run_experiment(sub, problem=shared_problem))
        labels.append(schedule.label())

    if any(r.group_table is None for r in results):
        raise ConfigurationError("schedule comparison needs a group table (m divisible by 3)")
    n_groups = len(results[0].group_table)
    rows = []
    for gi in range(n_groups):
        row = [gi + 1]
        for r in results:
            row.extend([r.group_table[gi][1], r.group_table[gi][2]])
        rows.append(tuple(row))
    header = ["group"]
    for label in labels:
        header.append(f"F_G[{label}]")
        header.append(f"D_G[{label}]")
    lines = [",".join(header)]
    for row in rows:
        lines.append(
            ",".join([str(row[0])] + [_fmt(v) for v in row[1:]])
        )
    comparison_path = os.path.join(config.out_dir, "comparison.csv")
    _write_lines(comparison_path, lines)

    totals = []
    for li, r in enumerate(results):
        totals.append(
            (
                labels[li],
                float(sum(g[1] for g in r.group_table)),
                float(sum(g[2] for g in r.group_table)),
            )
        )
    fingerprints = sorted({fp for r in results for fp in [instance_fingerprint(r.instance)]})
    manifest_path = os.path.join(config.out_dir, "compare.json")
    with open(manifest_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(
            {
                "schedules": labels,
                "paired_seed": config.seed,
                "instance_fingerprints": fingerprints,
                "totals": [
                    {"schedule": t[0], "F_G_total": t[1], "D_G_total": t[2]}
                    for t in totals
                ],
                "runs": [os.path.basename(r.out_dir) for r in results],
            },
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")
    out = CompareResult(
        out_dir=config.out_dir,
        comparison_path=comparison_path,
        manifest_path=manifest_path,
        labels=labels,
        rows=rows,
        run_results=results,
        totals=totals,
    )
    if plots:
        from . import viz

        viz.plot_comparison(config.out_dir)
    return out


def validate_setup(config):
    """Assumption checks for a configuration, without running anything.

    Returns a report dict: mixing-weight violations, windowed strong
    connectivity of the (static) graph, and the step-size conditions.
    """
    config.validate()
    topology, weights, w_min = config.build_network()
    report = {
        "users": config.users,
        "weight_violations": validate_weights(weights, topology, w_min=w_min),
        "strongly_connected": check_strong_connectivity([topology], 1),
        "step_size_ok": True,  # construction enforces the summability conditions
        "schedule": config.schedule().label(),
        "w_min": w_min,
    }
    report["ok"] = not report["weight_violations"] and report["strongly_connected"]
    return report
