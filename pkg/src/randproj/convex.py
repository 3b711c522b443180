"""Closed-form convex-analysis primitives.

Weighted-L1 objectives (evaluation, subgradient, proximity operator),
Euclidean-ball projection, diminishing step-size schedules, and helpers
for certifying the proximity-operator characterization.

All operations are pure functions of their inputs and hold no shared
mutable state.
"""

import numpy as np

from .errors import InputError

__all__ = [
    "WeightedL1",
    "Ball",
    "StepSizeSchedule",
    "l1_eval",
    "l1_subgradient",
    "l1_prox",
    "soft_threshold",
    "ball_project",
    "project_rows",
    "prox_characterization_holds",
]


class WeightedL1:
    """A separable weighted-L1 objective ``f(x) = sum_j a_j * |x_j - b_j|``.

    Parameters
    ----------
    weights : array_like
        Nonnegative coefficients ``a``, one per coordinate.
    anchors : array_like
        Offsets ``b``, one per coordinate; ``f`` vanishes at ``x = b``
        and is minimized there.
    """

    __slots__ = ("weights", "anchors")

    def __init__(self, weights, anchors):
        a = np.asarray(weights, dtype=float)
        b = np.asarray(anchors, dtype=float)
        if a.ndim != 1 or b.ndim != 1:
            raise InputError("weights and anchors must be 1-D vectors")
        if a.shape != b.shape:
            raise InputError(
                f"weights ({a.shape[0]}) and anchors ({b.shape[0]}) differ in length"
            )
        if a.shape[0] < 1:
            raise InputError("dimension must be at least 1")
        if np.any(a < 0):
            raise InputError("weights must be nonnegative")
        a.setflags(write=False)
        b.setflags(write=False)
        self.weights = a
        self.anchors = b

    @property
    def dim(self):
        return self.weights.shape[0]

    def __repr__(self):
        return f"WeightedL1(weights={self.weights!r}, anchors={self.anchors!r})"


class Ball:
    """A closed Euclidean ball ``{x : ||x - center|| <= radius}``."""

    __slots__ = ("center", "radius")

    def __init__(self, center, radius):
        c = np.asarray(center, dtype=float)
        if c.ndim != 1 or c.shape[0] < 1:
            raise InputError("center must be a 1-D vector")
        r = float(radius)
        if not r > 0:
            raise InputError(f"radius must be positive, got {r}")
        c.setflags(write=False)
        self.center = c
        self.radius = r

    @property
    def dim(self):
        return self.center.shape[0]

    def contains(self, x):
        """Membership test ``||x - center|| <= radius`` (no epsilon slack)."""
        return float(np.linalg.norm(np.asarray(x, dtype=float) - self.center)) <= self.radius

    def __repr__(self):
        return f"Ball(center={self.center!r}, radius={self.radius!r})"


class StepSizeSchedule:
    """Diminishing steps ``alpha_k = base / (k + 1) ** exponent``.

    With ``exponent`` in (1/2, 1] the steps are positive and nonincreasing,
    their sum diverges, and the sum of their squares converges, which is
    what the iteration engines require of a schedule.
    """

    __slots__ = ("base", "exponent")

    def __init__(self, base, exponent=1.0):
        base = float(base)
        exponent = float(exponent)
        if not base > 0:
            raise InputError(f"base step must be positive, got {base}")
        if not (0.5 < exponent <= 1.0):
            raise InputError(
                f"exponent must lie in (1/2, 1], got {exponent}"
            )
        self.base = base
        self.exponent = exponent

    def alpha(self, k):
        """Step size at iteration ``k`` (scalar or array of iteration counts)."""
        k = np.asarray(k)
        if np.any(k < 0):
            raise InputError("iteration index must be nonnegative")
        out = self.base / (k + 1.0) ** self.exponent
        return float(out) if out.ndim == 0 else out

    def label(self):
        """Short human-readable tag, used in comparison-table headers."""
        if self.exponent == 1.0:
            return f"{self.base:g}/(k+1)"
        return f"{self.base:g}/(k+1)^{self.exponent:g}"

    def __repr__(self):
        return f"StepSizeSchedule(base={self.base!r}, exponent={self.exponent!r})"


def _check_dim(f, x):
    x = np.asarray(x, dtype=float)
    if x.shape != (f.dim,):
        raise InputError(f"expected a vector of length {f.dim}, got shape {x.shape}")
    return x


def l1_eval(f, x):
    """Evaluate ``f(x) = sum_j a_j * |x_j - b_j|``.

    Always nonnegative; zero exactly when every weighted deviation vanishes.
    """
    x = _check_dim(f, x)
    return float(np.sum(f.weights * np.abs(x - f.anchors)))


def l1_subgradient(f, x):
    """A subgradient of the weighted-L1 objective at ``x``.

    Returns ``g`` with ``g_j = a_j * sign(x_j - b_j)``; at a kink
    (``x_j = b_j``) the zero element is chosen, so this is the
    minimal-norm member of the subdifferential. ``||g|| <= ||a||``.
    """
    x = _check_dim(f, x)
    return f.weights * np.sign(x - f.anchors)


def soft_threshold(t, lam):
    """Shrink ``t`` toward 0 by ``lam``: ``sign(t) * max(|t| - lam, 0)``.

    Broadcasts over arrays; ``lam`` must be nonnegative.
    """
    return np.sign(t) * np.maximum(np.abs(t) - lam, 0.0)


def l1_prox(f, alpha, x):
    """Proximity operator of ``alpha * f`` at ``x``.

    By separability this is coordinate-wise soft thresholding around the
    anchors: ``p_j = b_j + soft_threshold(x_j - b_j, alpha * a_j)``.
    The output is the unique minimizer of ``alpha*f(y) + (1/2)||x - y||^2``.
    """
    if not alpha > 0:
        raise InputError(f"alpha must be positive, got {alpha}")
    x = _check_dim(f, x)
    return f.anchors + soft_threshold(x - f.anchors, alpha * f.weights)


def ball_project(ball, x):
    """Metric projection of ``x`` onto a Euclidean ball.

    Returns ``x`` unchanged when inside, otherwise the radial point
    ``center + radius * (x - center) / ||x - center||``. The result is
    guaranteed to satisfy ``ball.contains(result)`` even after floating
    point rounding.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (ball.dim,):
        raise InputError(
            f"expected a vector of length {ball.dim}, got shape {x.shape}"
        )
    delta = x - ball.center
    dist = float(np.linalg.norm(delta))
    if dist <= ball.radius:
        return x.copy()
    below_one = np.nextafter(1.0, 0.0)
    y = ball.center + delta * (ball.radius / dist)
    # rounding can land the radial point just outside; shrink toward the
    # center until membership holds under the same norm computation
    for _ in range(64):
        d = float(np.linalg.norm(y - ball.center))
        if d <= ball.radius:
            break
        y = ball.center + (y - ball.center) * min(ball.radius / d, below_one)
    return y


def project_rows(points, centers, radii):
    """Row-wise ball projection: project ``points[i]`` onto ball ``i``.

    Batch form of :func:`ball_project` over stacked ``(m, d)`` arrays
    with per-row centers and radii; rows already inside their ball are
    returned bit-identical, and projected rows satisfy membership after
    rounding.
    """
    points = np.asarray(points, dtype=float)
    centers = np.asarray(centers, dtype=float)
    radii = np.asarray(radii, dtype=float)
    delta = points - centers
    dist = np.linalg.norm(delta, axis=1)
    outside = dist > radii
    if not outside.any():
        return points.copy()
    out = points.copy()
    c_out = centers[outside]
    r_out = radii[outside]
    below_one = np.nextafter(1.0, 0.0)
    y = c_out + delta[outside] * (r_out / dist[outside])[:, None]
    for _ in range(64):
        d2 = np.linalg.norm(y - c_out, axis=1)
        bad = d2 > r_out
        if not bad.any():
            break
        factor = np.minimum(r_out[bad] / d2[bad], below_one)
        y[bad] = c_out[bad] + (y[bad] - c_out[bad]) * factor[:, None]
    out[outside] = y
    return out


def prox_characterization_holds(f, alpha, x, p, trial_points, tol=1e-9):
    """Check the variational characterization of the proximity operator.

    ``p`` equals ``prox_{alpha f}(x)`` exactly when
    ``<y - p, x - p> + alpha*f(p) <= alpha*f(y)`` for every ``y``; this
    verifies the inequality (within ``tol``, absolute) over the supplied
    trial points. A necessary certificate only: it can confirm a
    violation but not exhaust all of R^d.
    """
    if not alpha > 0:
        raise InputError(f"alpha must be positive, got {alpha}")
    x = _check_dim(f, x)
    p = _check_dim(f, p)
    trials = [np.asarray(y, dtype=float) for y in trial_points]
    if len(trials) == 0:
        raise InputError("trial_points must be nonempty")
    fp = l1_eval(f, p)
    for y in trials:
        y = _check_dim(f, y)
        lhs = float(np.dot(y - p, x - p)) + alpha * fp
        rhs = alpha * l1_eval(f, y)
        if lhs > rhs + tol:
            return False
    return True
