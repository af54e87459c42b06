import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cgar.nn_core import (
    AdamState,
    ContractError,
    GradBuffer,
    MlpParams,
    NumericError,
    adam_step,
    adam_update,
    init_mlp,
    mlp_backward,
    mlp_forward,
)

from .fd import max_rel_error, numeric_grad


def affine_1_1(w, b, activation="identity"):
    return MlpParams([1, 1], [np.array([[w]], dtype=float)], [np.array([b], dtype=float)], activation)


def hand_net():
    # 2-2-1 relu; hidden pre-activations at x=[1,-1] are [3.5, -2.5]
    w1 = np.array([[1.0, -1.0], [-2.0, 0.5]])
    b1 = np.array([0.5, -1.0])
    w2 = np.array([[2.0], [-3.0]])
    b2 = np.array([0.25])
    return MlpParams([2, 2, 1], [w1, w2], [b1, b2], "relu")


def random_case(rng, batch=None):
    depth = rng.integers(1, 4)
    sizes = [int(rng.integers(1, 6)) for _ in range(depth + 1)]
    act = ["relu", "tanh", "identity"][rng.integers(3)]
    p = init_mlp(sizes, rng, act)
    shape = (sizes[0],) if batch is None else (batch, sizes[0])
    x = rng.normal(size=shape)
    up = rng.normal(size=shape[:-1] + (sizes[-1],))
    return p, x, up


def test_zero_network_outputs_zero():
    p = MlpParams([3, 4, 2], [np.zeros((3, 4)), np.zeros((4, 2))], [np.zeros(4), np.zeros(2)])
    assert np.array_equal(mlp_forward(p, [1.0, -2.0, 5.0]), np.zeros(2))


def test_affine_identity_case():
    assert mlp_forward(affine_1_1(2.0, 1.0), [3.0]) == pytest.approx([7.0])


def test_hand_evaluated_relu_network():
    assert mlp_forward(hand_net(), [1.0, -1.0]) == pytest.approx([7.25])


def test_dimension_mismatch_is_contract_error():
    with pytest.raises(ContractError):
        mlp_forward(hand_net(), [1.0, 2.0, 3.0])
    with pytest.raises(ContractError):
        mlp_backward(hand_net(), [1.0, 2.0], [1.0, 1.0])
    with pytest.raises(ContractError):
        MlpParams([2, 1], [np.zeros((1, 2))], [np.zeros(1)])


def test_zero_upstream_gives_zero_gradients():
    g = mlp_backward(hand_net(), [1.0, -1.0], [0.0])
    assert all(not a.any() for a in g.arrays())
    assert not g.input.any()


def test_scalar_chain_rule():
    g = mlp_backward(affine_1_1(1.7, -0.3), [2.5], [1.0])
    assert g.weights[0][0, 0] == pytest.approx(2.5)
    assert g.biases[0][0] == pytest.approx(1.0)
    assert g.input[0] == pytest.approx(1.7)


@pytest.mark.parametrize("batch", [None, 4])
def test_gradients_match_finite_differences(batch):
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(60):
        p, x, up = random_case(rng, batch)
        g = mlp_backward(p, x, up)
        f = lambda: float(np.sum(up * mlp_forward(p, x)))  # noqa: E731
        num = numeric_grad(f, p.arrays() + [x])
        worst = max(worst, max_rel_error(g.arrays() + [g.input], num))
    assert worst < 1e-4


def test_batched_gradient_is_sum_of_single_gradients():
    rng = np.random.default_rng(3)
    p, x, up = random_case(rng, batch=5)
    total = mlp_backward(p, x, up)
    parts = [mlp_backward(p, x[i], up[i]) for i in range(5)]
    acc = parts[0]
    for q in parts[1:]:
        acc = acc + q
    for a, b in zip(total.arrays(), acc.arrays()):
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-14)


def test_forward_backward_are_pure():
    rng = np.random.default_rng(5)
    p, x, up = random_case(rng, batch=3)
    snapshot = [a.copy() for a in p.arrays()]
    a1, a2 = mlp_forward(p, x), mlp_forward(p, x)
    g1, g2 = mlp_backward(p, x, up), mlp_backward(p, x, up)
    assert np.array_equal(a1, a2)
    for u, v in zip(g1.arrays(), g2.arrays()):
        assert np.array_equal(u, v)
    for u, v in zip(snapshot, p.arrays()):
        assert np.array_equal(u, v)


def test_init_bounds_and_seeding():
    p = init_mlp([16, 8, 3], np.random.default_rng(0))
    assert np.all(np.abs(p.weights[0]) <= 1 / 4)
    assert np.all(np.abs(p.weights[1]) <= 1 / np.sqrt(8))
    q = init_mlp([16, 8, 3], np.random.default_rng(0))
    assert all(np.array_equal(a, b) for a, b in zip(p.arrays(), q.arrays()))


def test_adam_zero_gradient_leaves_params():
    p = hand_net()
    new, state = adam_step(p, GradBuffer.zeros_like(p), AdamState.for_params(p), lr=0.1)
    for a, b in zip(p.arrays(), new.arrays()):
        assert np.array_equal(a, b)
    assert state.t == 1


def test_adam_first_step_hand_computed():
    # m = 0.1, v = 0.001; bias-corrected m_hat = v_hat = 1, step = lr / (1 + eps)
    (x,), state = adam_update([np.zeros(())], [np.ones(())], AdamState.for_arrays([np.zeros(())]), lr=0.1)
    assert float(x) == pytest.approx(-0.1 / (1 + 1e-8), abs=1e-15)
    assert state.m[0] == pytest.approx(0.1)
    assert state.v[0] == pytest.approx(0.001)


def test_adam_deterministic_and_counter():
    p = hand_net()
    g = mlp_backward(p, [1.0, -1.0], [1.0])
    s = AdamState.for_params(p)
    r1, s1 = adam_step(p, g, s, 0.01)
    r2, s2 = adam_step(p, g, s, 0.01)
    assert all(np.array_equal(a, b) for a, b in zip(r1.arrays(), r2.arrays()))
    assert s1.t == s2.t == s.t + 1
    _, s3 = adam_step(r1, g, s1, 0.01)
    assert s3.t == 2


def test_adam_rejects_nonfinite_gradient():
    with pytest.raises(NumericError):
        adam_update([np.zeros(2)], [np.array([1.0, np.nan])], AdamState.for_arrays([np.zeros(2)]), 0.1)
    with pytest.raises(ContractError):
        adam_update([np.zeros(2)], [np.zeros(2)], AdamState.for_arrays([np.zeros(2)]), 0.0)


@settings(max_examples=200, deadline=None)
@given(
    grads=st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=8),
    steps=st.integers(1, 5),
    lr=st.floats(1e-5, 1.0),
)
def test_adam_step_bounded_by_lr(grads, steps, lr):
    g = np.array(grads)
    x = np.zeros_like(g)
    state = AdamState.for_arrays([x])
    for _ in range(steps):
        (new,), state = adam_update([x], [g], state, lr)
        # constant gradient: |m_hat| <= sqrt(v_hat), so each step is at most lr
        assert np.all(np.abs(new - x) <= lr * (1 + 1e-9))
        assert np.all(state.v[0] >= 0)
        x = new
