"""Gradient clipping and Adam updates."""

import math
import random

import numpy as np

from staletodo.model import AdamState, adam_step, clip_gradients, global_norm


class TestClipGradients:
    def test_norm_below_limit_unchanged(self):
        grads = [np.array([0.6, 0.8])]  # norm 1.0
        out = clip_gradients(grads, max_norm=2.0)
        assert np.array_equal(out[0], grads[0])

    def test_norm_four_scaled_to_two(self):
        grads = [np.array([4.0, 0.0]), np.array([0.0])]  # norm 4
        out = clip_gradients(grads, max_norm=2.0)
        assert np.allclose(out[0], [2.0, 0.0])
        assert math.isclose(global_norm(out), 2.0, rel_tol=1e-12)

    def test_post_clip_norm_never_exceeds_limit(self):
        rng = np.random.default_rng(14)
        for _ in range(200):
            grads = [
                rng.normal(scale=rng.uniform(0.1, 10), size=rng.integers(1, 6))
                for _ in range(rng.integers(1, 5))
            ]
            out = clip_gradients(grads, max_norm=2.0)
            assert global_norm(out) <= 2.0 + 1e-9

    def test_clipping_preserves_direction(self):
        grads = [np.array([3.0, 4.0])]  # norm 5
        out = clip_gradients(grads, max_norm=2.0)
        assert np.allclose(out[0] / global_norm(out), grads[0] / 5.0)

    def test_zero_gradients_untouched(self):
        grads = [np.zeros(3)]
        out = clip_gradients(grads, max_norm=2.0)
        assert np.array_equal(out[0], np.zeros(3))


def reference_adam(params, grad_fn, steps, lr=0.001, b1=0.9, b2=0.999, eps=1e-8):
    """Plain-python scalar transcription of the Adam update equations."""
    params = list(params)
    m = [0.0] * len(params)
    v = [0.0] * len(params)
    history = []
    for t in range(1, steps + 1):
        grads = grad_fn(params)
        for i, g in enumerate(grads):
            m[i] = b1 * m[i] + (1 - b1) * g
            v[i] = b2 * v[i] + (1 - b2) * g * g
            m_hat = m[i] / (1 - b1**t)
            v_hat = v[i] / (1 - b2**t)
            params[i] = params[i] - lr * m_hat / (math.sqrt(v_hat) + eps)
        history.append(list(params))
    return history


class TestAdam:
    def test_first_step_is_minus_lr_times_sign(self):
        for g in (5.0, -0.003, 0.7):
            params = [np.array([1.0])]
            state = AdamState.for_params(params)
            adam_step(params, [np.array([g])], state, lr=0.001)
            step = params[0][0] - 1.0
            # bias-corrected moments cancel the magnitude (up to eps)
            assert math.isclose(step, -0.001 * math.copysign(1, g), rel_tol=1e-4)

    def test_first_step_exact_formula_near_eps(self):
        g = 1e-6
        params = [np.array([1.0])]
        state = AdamState.for_params(params)
        adam_step(params, [np.array([g])], state, lr=0.001)
        expected = -0.001 * g / (abs(g) + 1e-8)
        assert math.isclose(params[0][0] - 1.0, expected, rel_tol=1e-12)

    def test_zero_grad_fresh_state_leaves_params(self):
        params = [np.array([2.5, -1.0])]
        state = AdamState.for_params(params)
        adam_step(params, [np.zeros(2)], state)
        assert np.array_equal(params[0], [2.5, -1.0])
        assert state.t == 1

    def test_ten_step_quadratic_matches_reference(self):
        # minimize sum((x - target)^2) from x = [3, -2], target = [1, 1]
        target = np.array([1.0, 1.0])
        params = [np.array([3.0, -2.0])]
        state = AdamState.for_params(params)
        ours = []
        for _ in range(10):
            grads = [2.0 * (params[0] - target)]
            adam_step(params, grads, state, lr=0.05)
            ours.append(params[0].copy())

        ref = reference_adam(
            [3.0, -2.0],
            lambda p: [2.0 * (p[0] - 1.0), 2.0 * (p[1] - 1.0)],
            steps=10,
            lr=0.05,
        )
        for step_ours, step_ref in zip(ours, ref):
            assert math.isclose(step_ours[0], step_ref[0], rel_tol=1e-12)
            assert math.isclose(step_ours[1], step_ref[1], rel_tol=1e-12)

    def test_timestep_advances(self):
        params = [np.array([0.0])]
        state = AdamState.for_params(params)
        for expected in (1, 2, 3):
            adam_step(params, [np.array([0.1])], state)
            assert state.t == expected

    def test_descends_a_quadratic(self):
        params = [np.array([4.0])]
        state = AdamState.for_params(params)
        losses = []
        for _ in range(500):
            losses.append(float((params[0][0] - 1.0) ** 2))
            adam_step(params, [np.array([2.0 * (params[0][0] - 1.0)])], state, lr=0.05)
        assert losses[-1] < 1e-3
        assert losses[-1] < losses[0]
