"""Adam optimizer: reference-step equivalence, clipping, per-group rates."""

import numpy as np
import pytest

from tsdiff.autograd import parameter
from tsdiff.optim import Adam


def adam_reference(x, grads, lr, beta1=0.9, beta2=0.999, eps=1e-8):
    """Textbook Adam trajectory for a single parameter, no clipping."""
    m = np.zeros_like(x)
    v = np.zeros_like(x)
    out = x.copy()
    for t, g in enumerate(grads, start=1):
        m = beta1 * m + (1 - beta1) * g
        v = beta2 * v + (1 - beta2) * g * g
        m_hat = m / (1 - beta1**t)
        v_hat = v / (1 - beta2**t)
        out = out - lr * m_hat / (np.sqrt(v_hat) + eps)
    return out


class TestAdamStep:
    def test_matches_reference_trajectory(self):
        rng = np.random.default_rng(42)
        x0 = rng.standard_normal(6)
        grads = [rng.standard_normal(6) * 0.1 for _ in range(5)]
        p = parameter(x0)
        opt = Adam({"p": p}, lambda name: 0.01, clip_norm=None)
        for g in grads:
            p.grad = g.copy()
            opt.step()
        np.testing.assert_allclose(p.data, adam_reference(x0, grads, 0.01), rtol=1e-12)

    def test_first_step_size_is_learning_rate(self):
        """With bias correction the first step is ~lr in each coordinate."""
        p = parameter(np.zeros(4))
        opt = Adam({"p": p}, lambda name: 0.05, clip_norm=None)
        p.grad = np.array([1.0, -1.0, 2.0, -0.5])
        opt.step()
        np.testing.assert_allclose(np.abs(p.data), np.full(4, 0.05), rtol=1e-6)

    def test_skips_parameters_without_gradients(self):
        p = parameter(np.ones(3))
        q = parameter(np.ones(3))
        opt = Adam({"p": p, "q": q}, lambda name: 0.1, clip_norm=None)
        p.grad = np.ones(3)
        opt.step()
        assert not np.array_equal(p.data, np.ones(3))
        np.testing.assert_array_equal(q.data, np.ones(3))


class TestLearningRateGroups:
    def test_zero_rate_leaves_parameter_bit_unchanged(self):
        """lr=0 parameters are excluded entirely: no update, no moment state
        drift, and no contribution to the clipping norm."""
        p = parameter(np.ones(3))
        frozen = parameter(np.ones(3))
        rates = {"p": 0.1, "frozen": 0.0}
        opt = Adam({"p": p, "frozen": frozen}, lambda name: rates[name], clip_norm=1.0)
        p.grad = np.full(3, 0.1)
        frozen.grad = np.full(3, 100.0)  # would dominate the norm if counted
        norm = opt.step()
        np.testing.assert_array_equal(frozen.data, np.ones(3))
        assert norm == pytest.approx(np.sqrt(3 * 0.01))
        assert norm < 1.0  # frozen's giant gradient did not count

    def test_non_trainable_parameters_are_dropped(self):
        p = parameter(np.ones(2))
        fixed = parameter(np.ones(2))
        fixed.requires_grad = False
        opt = Adam({"p": p, "fixed": fixed}, lambda name: 0.1)
        assert set(opt.params) == {"p"}

    def test_groups_update_at_different_scales(self):
        fast = parameter(np.zeros(2))
        slow = parameter(np.zeros(2))
        rates = {"fast": 1e-2, "slow": 1e-4}
        opt = Adam({"fast": fast, "slow": slow}, lambda name: rates[name], clip_norm=None)
        fast.grad = np.ones(2)
        slow.grad = np.ones(2)
        opt.step()
        assert abs(fast.data[0]) == pytest.approx(1e-2, rel=1e-6)
        assert abs(slow.data[0]) == pytest.approx(1e-4, rel=1e-6)


class TestClipping:
    def test_norm_returned_is_pre_clip(self):
        p = parameter(np.zeros(4))
        opt = Adam({"p": p}, lambda name: 0.1, clip_norm=1.0)
        p.grad = np.full(4, 3.0)
        norm = opt.step()
        assert norm == pytest.approx(6.0)

    def test_clipped_step_equals_step_on_scaled_gradient(self):
        """Clipping to norm c must reproduce plain Adam fed g * c/||g||."""
        g = np.array([3.0, 4.0])  # norm 5
        a = parameter(np.zeros(2))
        opt_a = Adam({"a": a}, lambda name: 0.1, clip_norm=1.0)
        a.grad = g.copy()
        opt_a.step()

        b = parameter(np.zeros(2))
        opt_b = Adam({"b": b}, lambda name: 0.1, clip_norm=None)
        b.grad = g / 5.0
        opt_b.step()
        np.testing.assert_allclose(a.data, b.data, rtol=1e-12)

    def test_no_scaling_below_threshold(self):
        g = np.array([0.3, 0.4])  # norm 0.5 < 1
        a = parameter(np.zeros(2))
        opt_a = Adam({"a": a}, lambda name: 0.1, clip_norm=1.0)
        a.grad = g.copy()
        opt_a.step()
        b = parameter(np.zeros(2))
        opt_b = Adam({"b": b}, lambda name: 0.1, clip_norm=None)
        b.grad = g.copy()
        opt_b.step()
        np.testing.assert_array_equal(a.data, b.data)


class TestWeightDecay:
    def test_decoupled_decay_shrinks_weights(self):
        p = parameter(np.full(2, 10.0))
        opt = Adam({"p": p}, lambda name: 0.1, clip_norm=None, weight_decay=0.01)
        p.grad = np.zeros(2)
        opt.step()
        # zero gradient: the only movement is -lr * wd * w
        np.testing.assert_allclose(p.data, 10.0 - 0.1 * 0.01 * 10.0, rtol=1e-9)


class TestOptimizationConvergence:
    def test_minimizes_quadratic(self):
        p = parameter(np.array([5.0, -3.0]))
        opt = Adam({"p": p}, lambda name: 0.1, clip_norm=None)
        for _ in range(400):
            p.grad = None
            loss = ((p - np.array([1.0, 2.0])) ** 2).sum()
            loss.backward()
            opt.step()
        np.testing.assert_allclose(p.data, [1.0, 2.0], atol=1e-3)
