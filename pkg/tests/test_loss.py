"""Contrastive losses against brute-force oracles and closed-form values."""

import math

import numpy as np
import pytest

from test_autograd import check_gradients
from tsdiff.autograd import Tensor
from tsdiff.loss import (
    LogitMatrix,
    l2_normalize,
    logit_matrix,
    selfsup_loss,
    supervised_loss,
    target_matrix,
    target_matrix_transposed,
)

RNG = np.random.default_rng(42)


def softmax_row(row: np.ndarray) -> np.ndarray:
    e = np.exp(row - row.max())
    return e / e.sum()


def oracle_supervised(m: np.ndarray, y_t: np.ndarray, y_s: np.ndarray, signal_targets: str = "consistent") -> float:
    """Explicit-loop reimplementation: per-row softmax cross-entropy with
    first-match targets, averaged over both directions."""
    n = len(y_t)
    loss_texts = 0.0
    text_targets = []
    for i in range(n):
        tgt = next(j for j in range(n) if y_s[j] == y_t[i])
        text_targets.append(tgt)
        loss_texts -= math.log(softmax_row(m[i])[tgt])
    loss_signals = 0.0
    for j in range(n):
        if signal_targets == "consistent":
            tgt = next(i for i in range(n) if y_t[i] == y_s[j])
        else:
            tgt = text_targets[j]
        loss_signals -= math.log(softmax_row(m[:, j])[tgt])
    return 0.5 * (loss_texts / n + loss_signals / n)


def oracle_supervised_soft(m: np.ndarray, y_t: np.ndarray, y_s: np.ndarray) -> float:
    n = len(y_t)
    loss_texts = 0.0
    for i in range(n):
        p = softmax_row(m[i])
        matches = [j for j in range(n) if y_s[j] == y_t[i]]
        for j in matches:
            loss_texts -= math.log(p[j]) / len(matches)
    loss_signals = 0.0
    for j in range(n):
        p = softmax_row(m[:, j])
        matches = [i for i in range(n) if y_t[i] == y_s[j]]
        for i in matches:
            loss_signals -= math.log(p[i]) / len(matches)
    return 0.5 * (loss_texts / n + loss_signals / n)


def random_instance(rng, n=None):
    n = n or int(rng.integers(2, 17))
    y_t = rng.integers(1, 13, n)
    y_s = rng.permutation(y_t)
    m = rng.standard_normal((n, n)) * 3.0
    return m, y_t, y_s


class TestTargetMatrix:
    def test_matches_nested_loop_oracle_exactly(self):
        """1000 random label vectors against an index-by-index construction."""
        rng = np.random.default_rng(42)
        for _ in range(1000):
            _, y_t, y_s = random_instance(rng)
            n = len(y_t)
            g = target_matrix(y_t, y_s)
            for i in range(n):
                row_matches = sum(1 for j in range(n) if y_t[i] == y_s[j])
                for j in range(n):
                    expected = 1.0 if y_t[i] == y_s[j] else 0.0
                    assert g.binary[i, j] == expected
                    assert g.normalized[i, j] == expected / row_matches
            np.testing.assert_allclose(g.normalized.sum(axis=1), np.ones(n), atol=1e-9)

    def test_unmatched_text_row_raises(self):
        with pytest.raises(ValueError, match="no matching signal"):
            target_matrix(np.array([1, 2]), np.array([1, 1]))

    def test_rejects_bad_shapes(self):
        with pytest.raises(ValueError):
            target_matrix(np.array([[1]]), np.array([1]))
        with pytest.raises(ValueError):
            target_matrix(np.array([1, 2]), np.array([1]))

    def test_transposed_normalizes_columns(self):
        g = target_matrix(np.array([1, 1, 2]), np.array([1, 2, 1]))
        gt = target_matrix_transposed(g)
        np.testing.assert_allclose(gt.sum(axis=1), np.ones(3), atol=1e-12)
        np.testing.assert_array_equal(gt, g.binary.T / g.binary.T.sum(axis=1, keepdims=True))

    def test_transposed_rejects_unmatched_signal(self):
        g = target_matrix(np.array([1, 1]), np.array([1, 2]))
        with pytest.raises(ValueError, match="no matching text"):
            target_matrix_transposed(g)


class TestSupervisedLossOracle:
    def test_matches_brute_force_on_200_instances(self):
        """Relative error below 1e-10 on random batches of size 2..16."""
        rng = np.random.default_rng(42)
        for _ in range(200):
            m, y_t, y_s = random_instance(rng)
            got = supervised_loss(LogitMatrix(Tensor(m), tau=1.0), target_matrix(y_t, y_s)).item()
            want = oracle_supervised(m, y_t, y_s)
            assert abs(got - want) <= 1e-10 * max(1.0, abs(want))

    def test_literal_mode_matches_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            m, y_t, y_s = random_instance(rng)
            got = supervised_loss(
                LogitMatrix(Tensor(m), tau=1.0), target_matrix(y_t, y_s), signal_targets="literal"
            ).item()
            want = oracle_supervised(m, y_t, y_s, signal_targets="literal")
            assert abs(got - want) <= 1e-10 * max(1.0, abs(want))

    def test_soft_targets_match_oracle(self):
        rng = np.random.default_rng(9)
        for _ in range(100):
            m, y_t, y_s = random_instance(rng)
            got = supervised_loss(LogitMatrix(Tensor(m), tau=1.0), target_matrix(y_t, y_s), soft_targets=True).item()
            want = oracle_supervised_soft(m, y_t, y_s)
            assert abs(got - want) <= 1e-10 * max(1.0, abs(want))


class TestClosedFormValues:
    def test_zero_logits_give_log_n(self):
        """Uniform logits make every cross-entropy exactly log(N)."""
        for n in (2, 5, 8):
            m = LogitMatrix(Tensor(np.zeros((n, n))), tau=1.0)
            g = target_matrix(np.arange(n), np.arange(n))
            assert supervised_loss(m, g).item() == pytest.approx(math.log(n), rel=1e-12)
            assert selfsup_loss(m).item() == pytest.approx(math.log(n), rel=1e-12)

    def test_saturated_correct_logits_drive_loss_to_zero(self):
        m = LogitMatrix(Tensor(np.eye(4) * 200.0), tau=1.0)
        g = target_matrix(np.arange(4), np.arange(4))
        assert supervised_loss(m, g).item() < 1e-12
        assert selfsup_loss(m).item() < 1e-12

    def test_saturated_wrong_logits_explode(self):
        m_data = np.full((3, 3), 0.0)
        m_data[:, 0] = 200.0  # every text votes for signal 0
        m_data[0, 0] = 0.0
        m = LogitMatrix(Tensor(m_data), tau=1.0)
        g = target_matrix(np.arange(3), np.arange(3))
        assert supervised_loss(m, g).item() > 50.0

    def test_distinct_labels_reduce_supervised_to_selfsup(self):
        """With all labels distinct and aligned, G is the identity and the
        supervised targets coincide with the diagonal ones."""
        rng = np.random.default_rng(42)
        for _ in range(20):
            n = int(rng.integers(2, 10))
            m = LogitMatrix(Tensor(rng.standard_normal((n, n))), tau=1.0)
            g = target_matrix(np.arange(n), np.arange(n))
            assert supervised_loss(m, g).item() == selfsup_loss(m).item()

    def test_shift_invariance(self):
        rng = np.random.default_rng(42)
        m_data, y_t, y_s = random_instance(rng, n=6)
        g = target_matrix(y_t, y_s)
        base = supervised_loss(LogitMatrix(Tensor(m_data), tau=1.0), g).item()
        shifted = supervised_loss(LogitMatrix(Tensor(m_data + 123.0), tau=1.0), g).item()
        assert shifted == pytest.approx(base, abs=1e-9)


class TestLogitMatrix:
    def test_temperature_scales_dot_products(self):
        rng = np.random.default_rng(42)
        z_t = Tensor(rng.standard_normal((4, 8)))
        z_s = Tensor(rng.standard_normal((4, 8)))
        lm = logit_matrix(z_t, z_s, tau=0.5)
        np.testing.assert_allclose(lm.m.data, (z_t.data @ z_s.data.T) / 0.5, rtol=1e-12)
        assert lm.tau == 0.5

    def test_rejects_bad_temperature_and_shapes(self):
        z = Tensor(np.ones((2, 3)))
        with pytest.raises(ValueError):
            logit_matrix(z, z, tau=0.0)
        with pytest.raises(ValueError):
            logit_matrix(z, Tensor(np.ones((3, 3))), tau=1.0)


class TestL2Normalize:
    def test_rows_become_unit_length(self):
        rng = np.random.default_rng(42)
        z = l2_normalize(Tensor(rng.standard_normal((5, 7)) * 10.0))
        np.testing.assert_allclose(np.linalg.norm(z.data, axis=1), np.ones(5), rtol=1e-12)

    def test_zero_row_raises(self):
        z = np.ones((3, 4))
        z[1] = 0.0
        with pytest.raises(ValueError, match="zero-norm"):
            l2_normalize(Tensor(z))

    def test_gradient(self):
        check_gradients(
            lambda z: (l2_normalize(z) * Tensor(np.linspace(0.2, 1.0, 12).reshape(3, 4))).sum(),
            [RNG.standard_normal((3, 4))],
        )


class TestLossGradients:
    def test_supervised_loss_gradient_through_full_chain(self):
        """Finite differences through normalize -> logits -> supervised CE."""
        y_t = np.array([1, 2, 1, 3])
        y_s = np.array([2, 1, 3, 1])
        g = target_matrix(y_t, y_s)

        def loss(z_t, z_s):
            lm = logit_matrix(l2_normalize(z_t), l2_normalize(z_s), tau=1.0)
            return supervised_loss(lm, g)

        check_gradients(loss, [RNG.standard_normal((4, 6)), RNG.standard_normal((4, 6))])

    def test_soft_target_gradient(self):
        y = np.array([1, 1, 2])
        g = target_matrix(y, y)

        def loss(z_t, z_s):
            lm = logit_matrix(l2_normalize(z_t), l2_normalize(z_s), tau=1.0)
            return supervised_loss(lm, g, soft_targets=True)

        check_gradients(loss, [RNG.standard_normal((3, 5)), RNG.standard_normal((3, 5))])

    def test_selfsup_loss_gradient(self):
        def loss(z_t, z_s):
            lm = logit_matrix(l2_normalize(z_t), l2_normalize(z_s), tau=0.7)
            return selfsup_loss(lm)

        check_gradients(loss, [RNG.standard_normal((4, 6)), RNG.standard_normal((4, 6))])


class TestValidation:
    def test_non_finite_logits_rejected(self):
        m = np.zeros((2, 2))
        m[0, 0] = np.nan
        g = target_matrix(np.arange(2), np.arange(2))
        with pytest.raises(ValueError, match="non-finite"):
            supervised_loss(LogitMatrix(Tensor(m), tau=1.0), g)
        with pytest.raises(ValueError, match="non-finite"):
            selfsup_loss(LogitMatrix(Tensor(m), tau=1.0))

    def test_shape_mismatch_rejected(self):
        g = target_matrix(np.arange(3), np.arange(3))
        with pytest.raises(ValueError):
            supervised_loss(LogitMatrix(Tensor(np.zeros((2, 2))), tau=1.0), g)
        with pytest.raises(ValueError):
            selfsup_loss(LogitMatrix(Tensor(np.zeros((2, 3))), tau=1.0))

    def test_unknown_signal_target_mode_rejected(self):
        g = target_matrix(np.arange(2), np.arange(2))
        with pytest.raises(ValueError):
            supervised_loss(LogitMatrix(Tensor(np.zeros((2, 2))), tau=1.0), g, signal_targets="other")
