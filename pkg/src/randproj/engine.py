"""Synchronized iteration engines for the two random-projection methods.

Each round, every user mixes its neighbors' round-k estimates into a
weighted average, takes a local step against its own objective (either
a proximity-operator step or a subgradient step), and projects the
result onto one randomly drawn component of its private constraint set.
All users advance from the same round-k snapshot, so parallel and
serial execution of a round produce identical results.
"""

import enum

import numpy as np

from . import metrics
from .convex import Ball, StepSizeSchedule, WeightedL1, project_rows, soft_threshold
from .errors import ConfigurationError, InputError
from .network import validate_weights
from .sampling import ConstraintPartition, RngStream

__all__ = [
    "AlgorithmKind",
    "ProblemInstance",
    "AlgorithmState",
    "proximal_round",
    "subgradient_round",
    "run",
]

# strictly-positive threshold used when validating mixing weights
_W_POSITIVE = np.finfo(float).tiny


class AlgorithmKind(enum.Enum):
    PROXIMAL = "proximal"
    SUBGRADIENT = "subgradient"

    @classmethod
    def from_string(cls, name):
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            raise ConfigurationError(
                f"unknown algorithm {name!r}; choose proximal or subgradient"
            ) from None


class ProblemInstance:
    """The shared optimization problem: per-user objectives and ball constraints.

    Parameters
    ----------
    objectives : sequence of WeightedL1
        One private objective per user.
    constraints : sequence of sequence of Ball
        ``constraints[i]`` lists user ``i+1``'s constraint components;
        their list order is the composition order used by the metrics.
    partition : ConstraintPartition, optional
        Global component indexing; defaults to contiguous blocks in
        user order.
    anchor : array_like, optional
        A point known to lie in every component, recorded by the
        instance generator for verification only. The iteration engines
        never read it.
    """

    def __init__(self, objectives, constraints, partition=None, anchor=None):
        objectives = tuple(objectives)
        constraints = tuple(tuple(balls) for balls in constraints)
        m = len(objectives)
        if m < 1:
            raise ConfigurationError("need at least one user")
        if len(constraints) != m:
            raise ConfigurationError(
                f"{m} objectives but {len(constraints)} constraint lists"
            )
        d = objectives[0].dim
        for i, f in enumerate(objectives, start=1):
            if not isinstance(f, WeightedL1) or f.dim != d:
                raise ConfigurationError(f"objective of user {i} has wrong dimension")
        for i, balls in enumerate(constraints, start=1):
            if len(balls) < 1:
                raise ConfigurationError(f"user {i} has no constraint components")
            for ball in balls:
                if not isinstance(ball, Ball) or ball.dim != d:
                    raise ConfigurationError(
                        f"constraint component of user {i} has wrong dimension"
                    )
        counts = [len(balls) for balls in constraints]
        if partition is None:
            partition = ConstraintPartition.contiguous(counts)
        else:
            if partition.m != m:
                raise ConfigurationError("partition user count mismatch")
            if [partition.size(i) for i in range(1, m + 1)] != counts:
                raise ConfigurationError("partition sizes do not match constraints")
        if anchor is not None:
            anchor = np.asarray(anchor, dtype=float)
            if anchor.shape != (d,):
                raise ConfigurationError("anchor has wrong dimension")
        self.objectives = objectives
        self.constraints = constraints
        self.partition = partition
        self.anchor = anchor
        self.dimension = d
        self.m = m
        self._build_stacks()

    def _build_stacks(self):
        m, d = self.m, self.dimension
        self.weight_rows = np.stack([f.weights for f in self.objectives])
        self.anchor_rows = np.stack([f.anchors for f in self.objectives])
        self.component_counts = np.array(
            [len(balls) for balls in self.constraints], dtype=int
        )
        self.uniform_components = bool(np.all(self.component_counts == self.component_counts[0]))
        if self.uniform_components:
            n = int(self.component_counts[0])
            self.centers = np.stack(
                [np.stack([b.center for b in balls]) for balls in self.constraints]
            )
            self.radii = np.array(
                [[b.radius for b in balls] for balls in self.constraints]
            )
            self.global_index = np.array(
                [self.partition.index_sets[i] for i in range(m)], dtype=int
            )
            assert self.centers.shape == (m, n, d)
        else:
            self.centers = None
            self.radii = None
            self.global_index = None
        # flat views in ascending (user, component) order, for whole-problem sweeps
        self.flat_centers = np.concatenate(
            [np.stack([b.center for b in balls]) for balls in self.constraints]
        )
        self.flat_radii = np.concatenate(
            [np.array([b.radius for b in balls]) for balls in self.constraints]
        )

    def select_components(self, local_indices):
        """Centers and radii of each user's component ``local_indices[i]``."""
        if self.uniform_components:
            rows = np.arange(self.m)
            return self.centers[rows, local_indices], self.radii[rows, local_indices]
        cs = np.stack(
            [self.constraints[i][local_indices[i]].center for i in range(self.m)]
        )
        rs = np.array(
            [self.constraints[i][local_indices[i]].radius for i in range(self.m)]
        )
        return cs, rs

    def global_components(self, local_indices):
        """Translate per-user local component indices to global ones."""
        if self.global_index is not None:
            return self.global_index[np.arange(self.m), local_indices]
        return np.array(
            [self.partition.index_sets[i][local_indices[i]] for i in range(self.m)],
            dtype=int,
        )

    def objective_sum(self, x):
        """Network objective ``f(x) = sum_i f_i(x)`` at a single point."""
        x = np.asarray(x, dtype=float)
        return float(np.sum(self.weight_rows * np.abs(x[None, :] - self.anchor_rows)))

    def __repr__(self):
        return (
            f"ProblemInstance(m={self.m}, dimension={self.dimension}, "
            f"components={self.component_counts.sum()})"
        )


class AlgorithmState:
    """Snapshot of all users between rounds.

    Holds the round counter, the stacked estimates, the per-user
    constraint-selection streams, and diagnostics from the last
    completed round: the mixed averages, the drawn global component
    indices, and the residuals ``x_i(k+1) - v_i(k)``.
    """

    __slots__ = ("k", "estimates", "streams", "averages", "drawn", "residuals")

    def __init__(self, estimates, streams, k=0, averages=None, drawn=None, residuals=None):
        self.k = int(k)
        self.estimates = np.asarray(estimates, dtype=float)
        self.streams = tuple(streams)
        self.averages = averages
        self.drawn = drawn
        self.residuals = residuals

    @property
    def m(self):
        return self.estimates.shape[0]

    def __repr__(self):
        return f"AlgorithmState(k={self.k}, m={self.m})"


def _local_step(problem, v, alpha, kind):
    shifted = v - problem.anchor_rows
    if kind is AlgorithmKind.PROXIMAL:
        return problem.anchor_rows + soft_threshold(shifted, alpha * problem.weight_rows)
    return v - alpha * problem.weight_rows * np.sign(shifted)


def _advance(state, problem, weights, schedule, kind, local_indices):
    v = weights.entries @ state.estimates
    alpha = schedule.alpha(state.k)
    p = _local_step(problem, v, alpha, kind)
    centers, radii = problem.select_components(local_indices)
    x_next = project_rows(p, centers, radii)
    return AlgorithmState(
        x_next,
        state.streams,
        k=state.k + 1,
        averages=v,
        drawn=problem.global_components(local_indices),
        residuals=x_next - v,
    )


def _check_round_inputs(state, problem, weights):
    if state.estimates.shape != (problem.m, problem.dimension):
        raise ConfigurationError(
            f"state shape {state.estimates.shape} does not match problem "
            f"({problem.m}, {problem.dimension})"
        )
    if len(state.streams) != problem.m:
        raise ConfigurationError("state must carry one stream per user")
    w = weights.entries
    if w.shape != (problem.m, problem.m):
        raise ConfigurationError(
            f"weight matrix shape {w.shape} does not match {problem.m} users"
        )
    if np.any(w < 0):
        raise ConfigurationError("mixing weights must be nonnegative")
    if (
        np.max(np.abs(w.sum(axis=1) - 1.0)) > 1e-12
        or np.max(np.abs(w.sum(axis=0) - 1.0)) > 1e-12
    ):
        raise ConfigurationError("mixing weights must be doubly stochastic")


def _draw_round(state, problem):
    counts = problem.component_counts
    return np.array(
        [int(state.streams[i].integers(counts[i])) for i in range(problem.m)]
    )


def proximal_round(state, problem, weights, schedule):
    """One synchronous round of the proximity-operator method.

    Every user mixes the round-k estimates, applies the proximity
    operator of ``alpha_k * f_i`` at the average, and projects onto one
    freshly drawn constraint component. Returns the round-(k+1) state.
    """
    _check_round_inputs(state, problem, weights)
    return _advance(
        state, problem, weights, schedule, AlgorithmKind.PROXIMAL, _draw_round(state, problem)
    )


def subgradient_round(state, problem, weights, schedule):
    """One synchronous round of the subgradient method.

    As :func:`proximal_round`, but the local step is
    ``v_i - alpha_k * g_i`` with ``g_i`` a subgradient of ``f_i`` at the
    average ``v_i``.
    """
    _check_round_inputs(state, problem, weights)
    return _advance(
        state, problem, weights, schedule, AlgorithmKind.SUBGRADIENT, _draw_round(state, problem)
    )


def initial_state(problem, initial_box, seed, sampling=1):
    """Starting estimates drawn uniformly from a box, with fresh streams.

    Initial points come from each user's dedicated ``init`` stream and
    constraint draws from its ``constraint`` stream, so instrumentation
    or extra draws of one kind never perturb the other.
    """
    lo, hi = float(initial_box[0]), float(initial_box[1])
    if not lo <= hi:
        raise ConfigurationError(f"initial box ({lo}, {hi}) is empty")
    m, d = problem.m, problem.dimension
    estimates = np.stack(
        [
            RngStream(seed, "init", sampling, i).uniform(lo, hi, d)
            for i in range(1, m + 1)
        ]
    )
    streams = [RngStream(seed, "constraint", sampling, i) for i in range(1, m + 1)]
    return AlgorithmState(estimates, streams)


def run(
    problem,
    topology,
    weights,
    schedule,
    kind,
    iterations,
    initial_box=(-2.0, 2.0),
    seed=0,
    record_every=1,
    sampling=1,
):
    """Run one seeded trajectory and collect per-iteration metrics.

    Parameters
    ----------
    problem : ProblemInstance
    topology : Topology
        Communication graph; validated against ``weights`` before
        iteration 0.
    weights : WeightMatrix
    schedule : StepSizeSchedule
    kind : AlgorithmKind
    iterations : int
        Number of rounds (at least 1).
    initial_box : (float, float)
        Coordinate range for the random initial points.
    seed : int
        Master seed; all streams derive from it and ``sampling``.
    record_every : int
        Metrics cadence: iteration ``k`` is recorded when ``k`` is a
        multiple of this, plus always ``k = 0`` and the final round.
        Thinning never changes the trajectory itself.
    sampling : int
        Monte-Carlo sampling index, part of every stream id.

    Returns
    -------
    records : list of metrics.MetricsRecord
    state : AlgorithmState
        Final state after the last round.
    """
    iterations = int(iterations)
    if iterations < 1:
        raise InputError(f"iterations must be at least 1, got {iterations}")
    record_every = int(record_every)
    if record_every < 1:
        raise InputError(f"record_every must be at least 1, got {record_every}")
    if topology.m != problem.m:
        raise ConfigurationError(
            f"topology has {topology.m} users but problem has {problem.m}"
        )
    if not isinstance(kind, AlgorithmKind):
        kind = AlgorithmKind.from_string(kind)
    if not isinstance(schedule, StepSizeSchedule):
        raise ConfigurationError("schedule must be a StepSizeSchedule")
    violations = validate_weights(weights, topology, w_min=_W_POSITIVE)
    if violations:
        shown = "; ".join(violations[:3])
        raise ConfigurationError(f"invalid weight matrix: {shown}")

    state = initial_state(problem, initial_box, seed, sampling)
    # block-draw each user's whole selection sequence up front; identical
    # to per-round draws from the same streams
    draws = np.stack(
        [
            state.streams[i].integers(problem.component_counts[i], size=iterations)
            for i in range(problem.m)
        ]
    )
    records = [metrics.snapshot(problem, state.estimates, k=0, sampling=sampling)]
    for k in range(iterations):
        state = _advance(state, problem, weights, schedule, kind, draws[:, k])
        if state.k % record_every == 0 or state.k == iterations:
            records.append(
                metrics.snapshot(problem, state.estimates, k=state.k, sampling=sampling)
            )
    return records, state
