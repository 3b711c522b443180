import numpy as np
import pytest

from randproj import (
    Ball,
    InputError,
    StepSizeSchedule,
    WeightedL1,
    ball_project,
    l1_eval,
    l1_prox,
    l1_subgradient,
    project_rows,
    prox_characterization_holds,
)

rng = np.random.default_rng(20240817)


def grid_prox_1d(a, b, alpha, x, lo=-5.0, hi=5.0, step=1e-4):
    """Brute-force 1-D prox oracle: minimize alpha*a|y-b| + (1/2)(x-y)^2 on a grid."""
    ys = np.arange(lo, hi + step, step)
    vals = alpha * a * np.abs(ys - b) + 0.5 * (x - ys) ** 2
    return float(ys[np.argmin(vals)])


def naive_l1(a, b, x):
    total = 0.0
    for j in range(len(a)):
        total += a[j] * abs(x[j] - b[j])
    return total


class TestWeightedL1:
    def test_eval_at_anchor(self):
        f = WeightedL1([1.0, 1.0], [0.0, 0.0])
        assert l1_eval(f, [0.0, 0.0]) == 0.0

    def test_eval_direct_sum(self):
        f = WeightedL1([1.0, 2.0], [0.0, 1.0])
        assert l1_eval(f, [1.0, 0.0]) == 3.0

    def test_eval_against_naive_loop(self):
        f = WeightedL1([0.5], [0.25])
        expected = naive_l1([0.5], [0.25], [0.75])
        assert expected == pytest.approx(0.25, abs=0)
        assert l1_eval(f, [0.75]) == pytest.approx(expected, abs=1e-15)
        for _ in range(100):
            d = rng.integers(1, 8)
            a = rng.uniform(0, 2, d)
            b = rng.uniform(-1, 1, d)
            x = rng.uniform(-3, 3, d)
            assert l1_eval(WeightedL1(a, b), x) == pytest.approx(
                naive_l1(a, b, x), rel=1e-12
            )

    def test_eval_zero_iff_weighted_deviations_vanish(self):
        f = WeightedL1([0.0, 2.0], [0.5, 1.0])
        assert l1_eval(f, [9.0, 1.0]) == 0.0
        assert l1_eval(f, [9.0, 1.1]) > 0.0

    def test_dimension_mismatch(self):
        f = WeightedL1([1.0, 1.0], [0.0, 0.0])
        with pytest.raises(InputError):
            l1_eval(f, [1.0])
        with pytest.raises(InputError):
            l1_subgradient(f, [1.0, 2.0, 3.0])

    def test_negative_weights_rejected(self):
        with pytest.raises(InputError):
            WeightedL1([-0.1], [0.0])
        with pytest.raises(InputError):
            WeightedL1([1.0, 1.0], [0.0])


class TestSubgradient:
    def test_positive_side(self):
        f = WeightedL1([1.0], [0.0])
        assert l1_subgradient(f, [2.0]) == pytest.approx([1.0])

    def test_kink_gives_zero(self):
        f = WeightedL1([3.0], [1.0])
        assert l1_subgradient(f, [1.0]) == pytest.approx([0.0])

    def test_mixed_signs_and_inequality(self):
        f = WeightedL1([1.0, 2.0], [0.0, 0.0])
        x = np.array([-1.0, 0.5])
        g = l1_subgradient(f, x)
        assert g == pytest.approx([-1.0, 2.0])
        # subgradient inequality f(y) >= f(x) + <y-x, g> on random y
        fx = l1_eval(f, x)
        for _ in range(1000):
            y = rng.uniform(-4, 4, 2)
            assert l1_eval(f, y) >= fx + float((y - x) @ g) - 1e-12

    def test_inequality_random_instances(self):
        for _ in range(50):
            d = rng.integers(1, 6)
            f = WeightedL1(rng.uniform(0, 2, d), rng.uniform(-1, 1, d))
            x = rng.uniform(-3, 3, d)
            g = l1_subgradient(f, x)
            fx = l1_eval(f, x)
            for _ in range(40):
                y = rng.uniform(-4, 4, d)
                assert l1_eval(f, y) >= fx + float((y - x) @ g) - 1e-12

    def test_norm_bounds(self):
        for _ in range(200):
            d = rng.integers(1, 10)
            a = rng.uniform(0, 3, d)
            f = WeightedL1(a, rng.uniform(-1, 1, d))
            g = l1_subgradient(f, rng.uniform(-5, 5, d))
            assert np.linalg.norm(g) <= np.linalg.norm(a) + 1e-15
            assert np.max(np.abs(g)) <= np.max(a) + 1e-15


class TestProx:
    def test_grid_oracle_outside_threshold(self):
        f = WeightedL1([1.0], [0.0])
        oracle = grid_prox_1d(1.0, 0.0, 1.0, 3.0)
        assert oracle == pytest.approx(2.0, abs=2e-4)
        assert l1_prox(f, 1.0, [3.0]) == pytest.approx([2.0], abs=1e-15)

    def test_grid_oracle_inside_threshold(self):
        f = WeightedL1([1.0], [0.0])
        oracle = grid_prox_1d(1.0, 0.0, 1.0, 0.5)
        assert oracle == pytest.approx(0.0, abs=2e-4)
        assert l1_prox(f, 1.0, [0.5]) == pytest.approx([0.0], abs=1e-15)

    def test_anchor_is_fixed_point(self):
        for _ in range(20):
            d = rng.integers(1, 6)
            b = rng.uniform(-2, 2, d)
            f = WeightedL1(rng.uniform(0, 2, d), b)
            alpha = float(rng.uniform(0.01, 5))
            assert l1_prox(f, alpha, b) == pytest.approx(b, abs=0)

    def test_random_1d_against_grid(self):
        for _ in range(200):
            a = float(rng.uniform(0.05, 2.0))
            b = float(rng.uniform(-1, 1))
            alpha = float(rng.uniform(0.05, 2.0))
            x = float(rng.uniform(-3, 3))
            p = l1_prox(WeightedL1([a], [b]), alpha, [x])[0]
            assert abs(p - grid_prox_1d(a, b, alpha, x)) <= 2e-4

    def test_alpha_must_be_positive(self):
        f = WeightedL1([1.0], [0.0])
        with pytest.raises(InputError):
            l1_prox(f, 0.0, [1.0])
        with pytest.raises(InputError):
            l1_prox(f, -1.0, [1.0])

    def test_characterization_definitional(self):
        f = WeightedL1([1.0, 0.5, 2.0], [0.1, -0.3, 0.7])
        alpha = 0.8
        x = np.array([2.0, -1.0, 0.4])
        p = l1_prox(f, alpha, x)
        trials = [rng.uniform(-4, 4, 3) for _ in range(1000)]
        assert prox_characterization_holds(f, alpha, x, p, trials)

    def test_characterization_detects_violation(self):
        f = WeightedL1([1.0, 1.0], [0.0, 0.0])
        alpha = 0.01
        x = np.array([5.0, 5.0])
        wrong = x + np.array([1.0, 0.0])
        trials = [l1_prox(f, alpha, x), x]
        assert not prox_characterization_holds(f, alpha, x, wrong, trials)

    def test_characterization_zero_objective(self):
        # the prox of the zero objective is the identity
        f = WeightedL1([0.0, 0.0], [0.0, 0.0])
        x = np.array([1.5, -0.5])
        assert l1_prox(f, 1.0, x) == pytest.approx(x, abs=0)
        direction = np.array([1.0, 0.0])
        p_bad = x + 0.1 * direction
        trials = [x, x - direction, x + direction, p_bad + (x - p_bad) * 2]
        assert prox_characterization_holds(f, 1.0, x, x, trials)
        assert not prox_characterization_holds(f, 1.0, x, p_bad, trials)

    def test_characterization_empty_trials(self):
        f = WeightedL1([1.0], [0.0])
        with pytest.raises(InputError):
            prox_characterization_holds(f, 1.0, [1.0], [0.5], [])


def boundary_distance_oracle(center, radius, x, samples=2_000_000):
    """Nearest boundary point by dense angle sweep (2-D only)."""
    theta = np.linspace(0, 2 * np.pi, samples, endpoint=False)
    pts = np.stack(
        [center[0] + radius * np.cos(theta), center[1] + radius * np.sin(theta)],
        axis=1,
    )
    return pts[np.argmin(np.linalg.norm(pts - x, axis=1))]


class TestBallProject:
    def test_interior_point_unchanged(self):
        ball = Ball([0.0, 0.0], 1.0)
        x = np.array([0.5, 0.0])
        out = ball_project(ball, x)
        assert out is not x
        assert np.array_equal(out, x)

    def test_radial_projection(self):
        assert ball_project(Ball([0.0, 0.0], 1.0), [2.0, 0.0]) == pytest.approx(
            [1.0, 0.0]
        )

    def test_offcenter_against_boundary_oracle(self):
        center = np.array([1.0, 1.0])
        oracle = boundary_distance_oracle(center, 2.0, np.array([4.0, 5.0]))
        assert oracle == pytest.approx([2.2, 2.6], abs=1e-4)
        assert ball_project(Ball(center, 2.0), [4.0, 5.0]) == pytest.approx(
            [2.2, 2.6], abs=1e-12
        )

    def test_result_is_member_and_nearest(self):
        for _ in range(300):
            d = rng.integers(1, 8)
            ball = Ball(rng.uniform(-2, 2, d), float(rng.uniform(0.1, 3)))
            x = rng.uniform(-6, 6, d)
            p = ball_project(ball, x)
            assert ball.contains(p)
            # distance property: ||x - p|| = max(||x - c|| - r, 0)
            expected = max(float(np.linalg.norm(x - ball.center)) - ball.radius, 0.0)
            assert np.linalg.norm(x - p) == pytest.approx(expected, abs=1e-9)

    def test_project_rows_matches_scalar(self):
        m, d = 40, 5
        pts = rng.uniform(-6, 6, (m, d))
        centers = rng.uniform(-2, 2, (m, d))
        radii = rng.uniform(0.1, 3, m)
        batch = project_rows(pts, centers, radii)
        for i in range(m):
            single = ball_project(Ball(centers[i], radii[i]), pts[i])
            assert batch[i] == pytest.approx(single, abs=1e-12)
            assert np.linalg.norm(batch[i] - centers[i]) <= radii[i]

    def test_dimension_mismatch(self):
        with pytest.raises(InputError):
            ball_project(Ball([0.0, 0.0], 1.0), [1.0])


class TestFirmNonexpansivity:
    @staticmethod
    def _firm(px, py, x, y):
        lhs = np.sum((px - py) ** 2) + np.sum(((x - px) - (y - py)) ** 2)
        return lhs <= np.sum((x - y) ** 2) + 1e-9

    def test_ball_projection(self):
        for _ in range(500):
            d = rng.integers(1, 6)
            ball = Ball(rng.uniform(-2, 2, d), float(rng.uniform(0.1, 3)))
            x = rng.uniform(-5, 5, d)
            y = rng.uniform(-5, 5, d)
            assert self._firm(ball_project(ball, x), ball_project(ball, y), x, y)

    def test_prox(self):
        for _ in range(500):
            d = rng.integers(1, 6)
            f = WeightedL1(rng.uniform(0, 2, d), rng.uniform(-1, 1, d))
            alpha = float(rng.uniform(0.01, 3))
            x = rng.uniform(-5, 5, d)
            y = rng.uniform(-5, 5, d)
            assert self._firm(l1_prox(f, alpha, x), l1_prox(f, alpha, y), x, y)


class TestStepSizeSchedule:
    def test_validation(self):
        with pytest.raises(InputError):
            StepSizeSchedule(0.0)
        with pytest.raises(InputError):
            StepSizeSchedule(1.0, 0.5)
        with pytest.raises(InputError):
            StepSizeSchedule(1.0, 1.01)
        StepSizeSchedule(1.0, 0.51)
        StepSizeSchedule(1.0, 1.0)

    def test_values(self):
        sched = StepSizeSchedule(0.5, 1.0)
        assert sched.alpha(0) == 0.5
        assert sched.alpha(4) == 0.1
        assert StepSizeSchedule(1.0, 0.75).alpha(15) == pytest.approx(16 ** -0.75)

    def test_positive_and_nonincreasing_to_1e6(self):
        for exponent in (0.51, 0.75, 1.0):
            sched = StepSizeSchedule(2.0, exponent)
            alphas = sched.alpha(np.arange(1_000_001))
            assert np.all(alphas > 0)
            assert np.all(np.diff(alphas) <= 0)

    def test_square_sum_tail_bound_p1(self):
        # sum of (a0/(k+1))^2 up to 1e6 stays below a0^2 * pi^2 / 6
        a0 = 1.3
        alphas = StepSizeSchedule(a0, 1.0).alpha(np.arange(1_000_001))
        partial = float(np.sum(alphas**2))
        assert partial <= a0**2 * np.pi**2 / 6 + 1e-6

    def test_negative_iteration_rejected(self):
        with pytest.raises(InputError):
            StepSizeSchedule(1.0).alpha(-1)
