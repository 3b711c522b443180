"""Per-iteration performance measures.

``D_i(k)`` is the distance moved by one pass of user ``i``'s constraint
projections composed in ascending component order (zero exactly on the
user's feasible set), ``F_i(k)`` the private objective value. Group
aggregates sum consecutive triples of users, matching the benchmark's
reporting tables. The distance to the whole-network intersection has no
closed form for ball intersections, so a truncated cyclic-projection
upper bound is provided as a clearly labeled surrogate.
"""

from dataclasses import dataclass

import numpy as np

from .convex import ball_project, project_rows
from .errors import ConfigurationError, InputError

__all__ = [
    "MetricsRecord",
    "DistanceEstimate",
    "snapshot",
    "feasibility_measure",
    "feasibility_all",
    "objective_measure",
    "objective_all",
    "consensus_diameter",
    "mean_point",
    "group_members",
    "group_aggregates",
    "approx_distance_to_intersection",
]


@dataclass
class MetricsRecord:
    """Metrics of one recorded iteration of one sampling.

    ``feasibility`` and ``objective`` hold the per-user values
    ``D_i(k)`` and ``F_i(k)`` in user order; ``group_objective`` and
    ``group_feasibility`` are filled only at designated iterations.
    """

    sampling: int
    k: int
    feasibility: np.ndarray
    objective: np.ndarray
    diameter: float
    group_objective: np.ndarray | None = None
    group_feasibility: np.ndarray | None = None

    @property
    def m(self):
        return self.feasibility.shape[0]


@dataclass
class DistanceEstimate:
    """Truncated cyclic-projection surrogate for distance to the intersection.

    ``value`` upper-bounds the true distance up to the remaining
    cyclic-projection gap; ``converged`` marks whether successive sweeps
    settled below tolerance within the sweep budget.
    """

    value: float
    sweeps: int
    converged: bool


def _composed_projection_rows(problem, points):
    # one ascending pass of every user's own projections, all users at once
    y = np.array(points, dtype=float)
    if problem.uniform_components:
        for j in range(int(problem.component_counts[0])):
            y = project_rows(y, problem.centers[:, j, :], problem.radii[:, j])
        return y
    for i in range(problem.m):
        z = y[i]
        for ball in problem.constraints[i]:
            z = ball_project(ball, z)
        y[i] = z
    return y


def feasibility_all(problem, estimates):
    """Vector of ``D_i`` for all users' stacked estimates."""
    x = np.asarray(estimates, dtype=float)
    return np.linalg.norm(x - _composed_projection_rows(problem, x), axis=1)


def feasibility_measure(problem, i, x):
    """``D_i``: displacement of one ascending pass of user ``i``'s projections."""
    x = np.asarray(x, dtype=float)
    if x.shape != (problem.dimension,):
        raise InputError(
            f"expected a vector of length {problem.dimension}, got shape {x.shape}"
        )
    y = x
    for ball in problem.constraints[i - 1]:
        y = ball_project(ball, y)
    return float(np.linalg.norm(x - y))


def objective_measure(problem, i, x):
    """``F_i``: user ``i``'s private objective at ``x``."""
    f = problem.objectives[i - 1]
    x = np.asarray(x, dtype=float)
    if x.shape != (problem.dimension,):
        raise InputError(
            f"expected a vector of length {problem.dimension}, got shape {x.shape}"
        )
    return float(np.sum(f.weights * np.abs(x - f.anchors)))


def objective_all(problem, estimates):
    """Vector of ``F_i`` for all users' stacked estimates."""
    x = np.asarray(estimates, dtype=float)
    return np.sum(problem.weight_rows * np.abs(x - problem.anchor_rows), axis=1)


def consensus_diameter(estimates):
    """Largest pairwise distance among the users' estimates."""
    x = np.asarray(estimates, dtype=float)
    if x.ndim != 2:
        raise InputError("estimates must be a stacked (m, d) array")
    diff = x[:, None, :] - x[None, :, :]
    return float(np.sqrt(np.max(np.sum(diff * diff, axis=2))))


def mean_point(estimates):
    """The network-average point ``(1/m) sum_i x_i``."""
    return np.asarray(estimates, dtype=float).mean(axis=0)


def snapshot(problem, estimates, k, sampling):
    """Assemble the MetricsRecord of the current estimates."""
    return MetricsRecord(
        sampling=int(sampling),
        k=int(k),
        feasibility=feasibility_all(problem, estimates),
        objective=objective_all(problem, estimates),
        diameter=consensus_diameter(estimates),
    )


def group_members(m):
    """User groups ``G_t = {3t-1, 3t, 3t+1}`` (wrapping), ``t = 1..m/3``."""
    m = int(m)
    if m < 3 or m % 3 != 0:
        raise ConfigurationError(f"groups need a user count divisible by 3, got {m}")
    groups = []
    for t in range(1, m // 3 + 1):
        last = 3 * t + 1
        groups.append((3 * t - 1, 3 * t, last if last <= m else 1))
    return tuple(groups)


def group_aggregates(record):
    """Per-group sums ``(F_G, D_G)`` of a record's user values.

    Returns a list of ``(group_number, F_G, D_G)`` with groups numbered
    from 1; requires the user count to be divisible by 3.
    """
    groups = group_members(record.m)
    out = []
    for t, members in enumerate(groups, start=1):
        idx = [i - 1 for i in members]
        out.append(
            (t, float(record.objective[idx].sum()), float(record.feasibility[idx].sum()))
        )
    return out


def approx_distance_to_intersection(problem, x, tol=1e-10, max_sweeps=10_000):
    """Upper-bound the distance from ``x`` to the whole intersection.

    Runs cyclic projections through every component of every user in
    ascending order until a full sweep moves less than ``tol`` or the
    sweep budget runs out, and returns the displacement from ``x`` to
    the limit point. A surrogate, not the exact distance.
    """
    if not tol > 0:
        raise InputError(f"tol must be positive, got {tol}")
    x = np.asarray(x, dtype=float)
    centers = problem.flat_centers
    radii = problem.flat_radii
    y = x.copy()
    converged = False
    sweeps = 0
    for sweeps in range(1, int(max_sweeps) + 1):
        before = y.copy()
        for c, r in zip(centers, radii):
            delta = y - c
            dist = float(np.linalg.norm(delta))
            if dist > r:
                y = c + delta * (r / dist)
        if float(np.linalg.norm(y - before)) < tol:
            converged = True
            break
    return DistanceEstimate(
        value=float(np.linalg.norm(x - y)), sweeps=sweeps, converged=converged
    )
