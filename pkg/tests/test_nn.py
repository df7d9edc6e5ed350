"""Numerical-core tests: forward/backward, softmax, losses, Adam, grad checks."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from motioncodes import nn


def make_net(rng, dims, acts):
    return nn.init_dense(rng, dims, acts)


class TestForward:
    def test_zero_params_give_zero_output(self):
        params = nn.DenseParams([nn.Layer(np.zeros((3, 4)), np.zeros(3), nn.RELU)])
        out, _ = nn.forward(params, np.ones(4))
        assert out.tolist() == [0.0, 0.0, 0.0]

    def test_identity_layer(self):
        params = nn.DenseParams([nn.Layer(np.eye(3), np.zeros(3), nn.IDENTITY)])
        x = np.array([1.5, -2.0, 0.25])
        out, _ = nn.forward(params, x)
        assert np.array_equal(out, x)

    def test_relu_clamps(self):
        params = nn.DenseParams([nn.Layer(np.array([[2.0]]), np.array([1.0]), nn.RELU)])
        out, _ = nn.forward(params, np.array([-3.0]))
        assert out.tolist() == [0.0]  # max(0, 2 * -3 + 1)

    def test_batch_matches_single(self):
        rng = np.random.default_rng(0)
        params = make_net(rng, [4, 6, 2], [nn.RELU, nn.IDENTITY])
        xs = rng.normal(size=(5, 4))
        batch_out, _ = nn.forward(params, xs)
        for i in range(5):
            single_out, _ = nn.forward(params, xs[i])
            assert np.allclose(batch_out[i], single_out)

    def test_dimension_mismatch(self):
        params = nn.DenseParams([nn.Layer(np.zeros((3, 4)), np.zeros(3), nn.RELU)])
        with pytest.raises(nn.DimensionMismatchError):
            nn.forward(params, np.ones(5))

    def test_mismatched_chain_rejected(self):
        with pytest.raises(nn.DimensionMismatchError):
            nn.DenseParams(
                [
                    nn.Layer(np.zeros((3, 4)), np.zeros(3), nn.RELU),
                    nn.Layer(np.zeros((2, 5)), np.zeros(2), nn.IDENTITY),
                ]
            )


class TestSoftmax:
    def test_symmetric_pair(self):
        assert nn.softmax(np.array([0.0, 0.0])).tolist() == [0.5, 0.5]

    def test_large_logits_do_not_overflow(self):
        out = nn.softmax(np.array([1000.0, 1000.0, 1000.0]))
        assert np.allclose(out, [1 / 3] * 3)
        assert np.isfinite(out).all()

    def test_closed_form(self):
        out = nn.softmax(np.array([math.log(2.0), 0.0]))
        assert np.allclose(out, [2 / 3, 1 / 3])

    @given(st.lists(st.floats(-50, 50), min_size=2, max_size=8), st.floats(-30, 30))
    def test_shift_invariance_and_normalization(self, logits, shift):
        arr = np.array(logits)
        a = nn.softmax(arr)
        b = nn.softmax(arr + shift)
        assert abs(a.sum() - 1.0) < 1e-9
        assert np.abs(a - b).max() < 1e-9
        assert int(np.argmax(a)) == int(np.argmax(b))


class TestCrossEntropy:
    def test_one_hot_is_zero(self):
        assert nn.cross_entropy(np.array([0.0, 1.0, 0.0]), 1) == 0.0

    def test_uniform_three_classes(self):
        val = nn.cross_entropy(np.full(3, 1 / 3), 0)
        assert abs(val - math.log(3)) < 1e-12

    def test_uniform_sum_over_five_heads_is_ln_180(self):
        total = sum(
            nn.cross_entropy(np.full(c, 1 / c), 0) for c in [5, 2, 3, 3, 2]
        )
        assert abs(total - math.log(180)) < 1e-9

    def test_target_out_of_range(self):
        with pytest.raises(nn.TargetOutOfRangeError):
            nn.cross_entropy(np.array([0.5, 0.5]), 2)

    def test_degenerate_prediction_is_bounded(self):
        val = nn.cross_entropy(np.array([1.0, 0.0]), 1)
        assert val == pytest.approx(-math.log(1e-12))


class TestAdam:
    def test_zero_grad_is_identity(self):
        params = [np.array([1.0, -2.0]), np.array([[3.0]])]
        grads = [np.zeros(2), np.zeros((1, 1))]
        state = nn.AdamState.for_params(params)
        nn.adam_step(params, grads, state, lr=0.01)
        assert params[0].tolist() == [1.0, -2.0]
        assert params[1].tolist() == [[3.0]]
        assert all(np.all(m == 0) for m in state.m)
        assert all(np.all(v == 0) for v in state.v)

    def test_first_step_magnitude(self):
        params = [np.array([0.0])]
        state = nn.AdamState.for_params(params)
        nn.adam_step(params, [np.array([1.0])], state, lr=0.001)
        # bias-corrected first step is -lr * g / (|g| + eps)
        assert params[0][0] == pytest.approx(-0.001, rel=1e-6)

    def test_repeated_steps_move_against_gradient(self):
        params = [np.array([0.0])]
        state = nn.AdamState.for_params(params)
        prev = 0.0
        for _ in range(5):
            nn.adam_step(params, [np.array([1.0])], state, lr=0.001)
            assert params[0][0] < prev
            prev = params[0][0]

    def test_shape_mismatch(self):
        params = [np.zeros(3)]
        state = nn.AdamState.for_params(params)
        with pytest.raises(nn.ShapeMismatchError):
            nn.adam_step(params, [np.zeros(4)], state, lr=0.1)


class TestGradCheck:
    def test_quadratic(self):
        w = [np.array([3.0])]
        err = nn.grad_check(
            lambda p: float(p[0][0] ** 2),
            lambda p: [2.0 * p[0]],
            w,
        )
        assert err < 1e-8
        assert w[0][0] == 3.0  # restored

    def test_constant(self):
        err = nn.grad_check(
            lambda p: 1.0, lambda p: [np.zeros(3)], [np.ones(3)]
        )
        assert err == 0.0

    def test_non_finite_loss(self):
        with pytest.raises(nn.NonFiniteLossError):
            nn.grad_check(
                lambda p: float("nan"), lambda p: [np.zeros(1)], [np.zeros(1)]
            )

    @staticmethod
    def multihead_loss_and_grad(trunk, heads, xs, targets, lambdas):
        def loss_fn(_):
            hidden, _c = nn.forward(trunk, xs)
            total = 0.0
            for k, head in enumerate(heads):
                logits, _hc = nn.forward(head, hidden)
                loss_k, _ = nn.softmax_xent(logits, targets[:, k])
                total += lambdas[k] * loss_k
            return total

        def grad_fn(_):
            hidden, tc = nn.forward(trunk, xs)
            grad_hidden = np.zeros_like(hidden)
            head_grads = []
            for k, head in enumerate(heads):
                logits, hc = nn.forward(head, hidden)
                _, dlogits = nn.softmax_xent(logits, targets[:, k])
                gk, dh = nn.backward(head, hc, lambdas[k] * dlogits)
                grad_hidden += dh
                for dw, db in gk:
                    head_grads += [dw, db]
            tg, _ = nn.backward(trunk, tc, grad_hidden)
            flat = []
            for dw, db in tg:
                flat += [dw, db]
            return flat + head_grads

        return loss_fn, grad_fn

    def test_two_head_model_backprop(self):
        rng = np.random.default_rng(7)
        trunk = make_net(rng, [4, 8], [nn.RELU])
        heads = [make_net(rng, [8, 3], [nn.IDENTITY]), make_net(rng, [8, 2], [nn.IDENTITY])]
        xs = rng.normal(size=(5, 4))
        targets = np.column_stack([rng.integers(0, 3, 5), rng.integers(0, 2, 5)])
        arrays = nn.dense_arrays(trunk)
        for h in heads:
            arrays += nn.dense_arrays(h)
        loss_fn, grad_fn = self.multihead_loss_and_grad(
            trunk, heads, xs, targets, [1.0, 0.5]
        )
        assert nn.grad_check(loss_fn, grad_fn, arrays) < 1e-5

    @settings(deadline=None, max_examples=10)
    @given(st.integers(0, 10_000))
    def test_random_small_models(self, seed):
        rng = np.random.default_rng(seed)
        trunk = make_net(rng, [3, 5], [nn.RELU])
        head = make_net(rng, [5, 4], [nn.IDENTITY])
        xs = rng.normal(size=(4, 3))
        targets = rng.integers(0, 4, size=(4, 1))
        arrays = nn.dense_arrays(trunk) + nn.dense_arrays(head)
        loss_fn, grad_fn = self.multihead_loss_and_grad(
            trunk, [head], xs, targets, [1.0]
        )
        assert nn.grad_check(loss_fn, grad_fn, arrays) < 1e-5


class TestFitMultihead:
    def test_loss_decreases_on_separable_data(self):
        rng = np.random.default_rng(3)
        xs = np.vstack([rng.normal(-2, 0.1, (40, 2)), rng.normal(2, 0.1, (40, 2))])
        ys = np.repeat([0, 1], 40).reshape(-1, 1)
        trunk = make_net(np.random.default_rng(0), [2, 8], [nn.RELU])
        head = make_net(np.random.default_rng(1), [8, 2], [nn.IDENTITY])
        history, state = nn.fit_multihead(
            trunk,
            [head],
            xs,
            ys,
            [1.0],
            epochs=20,
            batch_size=16,
            lr=0.01,
            lr_decay=1.0,
            lr_decay_every=5,
            seed=0,
        )
        assert history[-1]["train_loss"] < history[0]["train_loss"] / 5
        assert state.t == 20 * 5  # 5 batches per epoch

    def test_deterministic_under_seed(self):
        def run():
            rng = np.random.default_rng(11)
            xs = rng.normal(size=(30, 3))
            ys = rng.integers(0, 2, size=(30, 1))
            trunk = make_net(np.random.default_rng(5), [3, 6], [nn.RELU])
            head = make_net(np.random.default_rng(6), [6, 2], [nn.IDENTITY])
            history, _ = nn.fit_multihead(
                trunk, [head], xs, ys, [1.0],
                epochs=5, batch_size=8, lr=0.005, lr_decay=0.6,
                lr_decay_every=2, seed=42,
            )
            return history[-1]["train_loss"], trunk.layers[0].weight.copy()

        loss_a, w_a = run()
        loss_b, w_b = run()
        assert loss_a == loss_b
        assert np.array_equal(w_a, w_b)

    def test_lr_schedule(self):
        rng = np.random.default_rng(2)
        xs = rng.normal(size=(8, 2))
        ys = np.zeros((8, 1), dtype=int)
        trunk = make_net(rng, [2, 4], [nn.RELU])
        head = make_net(rng, [4, 2], [nn.IDENTITY])
        history, _ = nn.fit_multihead(
            trunk, [head], xs, ys, [1.0],
            epochs=12, batch_size=8, lr=0.0003, lr_decay=0.6,
            lr_decay_every=5, seed=0,
        )
        lrs = [row["lr"] for row in history]
        assert lrs[0] == lrs[4] == 0.0003
        assert lrs[5] == pytest.approx(0.0003 * 0.6)
        assert lrs[10] == pytest.approx(0.0003 * 0.36)


class TestCheckpointIO:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(9)
        params = make_net(rng, [3, 4, 2], [nn.RELU, nn.IDENTITY])
        state = nn.AdamState.for_params(nn.dense_arrays(params))
        state.t = 17
        path = tmp_path / "net.json"
        nn.write_checkpoint(
            path,
            "test_net",
            {
                "config_hash": "deadbeef",
                "net": nn.dense_to_jsonable(params),
                "optimizer": nn.adam_to_jsonable(state),
            },
        )
        doc = nn.read_checkpoint(path, "test_net")
        restored = nn.dense_from_jsonable(doc["net"])
        for a, b in zip(params.layers, restored.layers):
            assert np.array_equal(a.weight, b.weight)
            assert np.array_equal(a.bias, b.bias)
            assert a.activation == b.activation
        adam = nn.adam_from_jsonable(doc["optimizer"])
        assert adam.t == 17
        assert doc["config_hash"] == "deadbeef"

    def test_identical_payloads_identical_bytes(self, tmp_path):
        params = nn.DenseParams([nn.Layer(np.ones((2, 2)) / 3, np.zeros(2), nn.RELU)])
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        for p in (p1, p2):
            nn.write_checkpoint(p, "net", {"net": nn.dense_to_jsonable(params)})
        assert p1.read_bytes() == p2.read_bytes()

    def test_kind_mismatch(self, tmp_path):
        path = tmp_path / "x.json"
        nn.write_checkpoint(path, "a", {})
        with pytest.raises(nn.NNError):
            nn.read_checkpoint(path, "b")
