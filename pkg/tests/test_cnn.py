import numpy as np
import pytest

from somekg.cnn import (
    CnnModel,
    LayerSpec,
    accuracy,
    backward,
    build_some_cnn,
    conv2d_forward,
    cross_entropy,
    forward,
    maxpool_forward,
    predict,
    train_cnn,
)
from somekg.errors import ConfigurationError, ShapeError


# -- convolution -------------------------------------------------------------

def test_conv_identity_kernel():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(1, 5, 5))
    w = np.ones((1, 1, 1, 1))
    out = conv2d_forward(x, w, np.zeros(1), "linear")
    assert np.allclose(out, x)


def test_conv_constant_bias():
    x = np.zeros((1, 4, 4))
    w = np.zeros((3, 1, 2, 2))
    out = conv2d_forward(x, w, np.full(3, 0.3), "linear")
    assert out.shape == (3, 3, 3)
    assert np.allclose(out, 0.3)


def test_conv_matches_nested_loops():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(1, 5, 5))
    w = rng.normal(size=(2, 1, 3, 3))
    b = rng.normal(size=2)
    out = conv2d_forward(x, w, b, "linear")
    for f in range(2):
        for i in range(3):
            for j in range(3):
                acc = b[f]
                for c in range(1):
                    for di in range(3):
                        for dj in range(3):
                            acc += w[f, c, di, dj] * x[c, i + di, j + dj]
                assert out[f, i, j] == pytest.approx(acc, rel=1e-12)


def test_conv_kernel_too_large():
    with pytest.raises(ShapeError):
        conv2d_forward(np.zeros((1, 2, 2)), np.zeros((1, 1, 3, 3)), np.zeros(1))


def test_conv_activation_applied():
    x = np.full((1, 2, 2), -1.0)
    w = np.ones((1, 1, 1, 1))
    assert np.allclose(conv2d_forward(x, w, np.zeros(1), "relu"), 0.0)
    assert np.allclose(conv2d_forward(x, w, np.zeros(1), "tanh"), np.tanh(-1.0))


# -- max pooling ----------------------------------------------------------------

def test_maxpool_single_window():
    out, arg = maxpool_forward(np.array([[[1.0, 2.0], [3.0, 4.0]]]))
    assert out.tolist() == [[[4.0]]]


def test_maxpool_constant_halves_size():
    out, _ = maxpool_forward(np.full((2, 6, 6), 1.5))
    assert out.shape == (2, 3, 3)
    assert np.allclose(out, 1.5)


def test_maxpool_drops_odd_trailing():
    x = np.arange(25, dtype=float).reshape(1, 5, 5)
    out, _ = maxpool_forward(x)
    assert out.shape == (1, 2, 2)


def test_maxpool_matches_naive():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(3, 6, 6))
    out, _ = maxpool_forward(x)
    for c in range(3):
        for i in range(3):
            for j in range(3):
                window = x[c, 2 * i : 2 * i + 2, 2 * j : 2 * j + 2]
                assert out[c, i, j] == window.max()


def test_maxpool_too_small():
    with pytest.raises(ShapeError):
        maxpool_forward(np.zeros((1, 1, 1)))


# -- forward ---------------------------------------------------------------------

def small_model(dropout_rate=0.0, seed=0):
    specs = [
        LayerSpec("conv", filters=2, kernel=(3, 3), activation="tanh"),
        LayerSpec("maxpool", pool=(2, 2)),
        LayerSpec("conv", filters=3, kernel=(2, 2), activation="relu"),
        LayerSpec("dropout", rate=dropout_rate),
        LayerSpec("dense", units=5, activation="tanh"),
        LayerSpec("dense", units=3, activation="linear"),
        LayerSpec("softmax"),
    ]
    return CnnModel((1, 8, 8), specs, seed=seed)


def test_forward_probabilities_sum_to_one():
    rng = np.random.default_rng(3)
    model = small_model()
    batch = rng.normal(size=(4, 1, 8, 8))
    probs = forward(model, batch)
    assert probs.shape == (4, 3)
    assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-12)


def test_forward_symmetric_logits():
    model = CnnModel((1, 8, 8), [
        LayerSpec("dense", units=2, activation="linear"),
        LayerSpec("softmax"),
    ], seed=0)
    model.layers[0].weights[...] = 0.0
    model.layers[0].biases[...] = 0.0
    probs = forward(model, np.zeros((1, 1, 8, 8)))
    assert np.allclose(probs, 0.5)


def test_forward_inference_deterministic_with_dropout():
    rng = np.random.default_rng(4)
    model = small_model(dropout_rate=0.5)
    batch = rng.normal(size=(2, 1, 8, 8))
    a = forward(model, batch, training=False)
    b = forward(model, batch, training=False)
    assert np.array_equal(a, b)


def test_forward_shape_error_names_layer():
    model = small_model()
    with pytest.raises(ShapeError):
        forward(model, np.zeros((1, 1, 4, 4)))


def test_dropout_rate_zero_is_identity():
    rng = np.random.default_rng(5)
    batch = rng.normal(size=(2, 1, 8, 8))
    m0 = small_model(dropout_rate=0.0)
    train_fwd = forward(m0, batch, training=True, rng=np.random.default_rng(0))
    eval_fwd = forward(m0, batch, training=False)
    assert np.array_equal(train_fwd, eval_fwd)


# -- backward ------------------------------------------------------------------------

def test_uniform_prediction_loss_is_log_c():
    probs = np.full((4, 5), 0.2)
    labels = np.array([0, 1, 2, 3])
    assert cross_entropy(probs, labels) == pytest.approx(np.log(5))


def test_confident_correct_prediction_loss_near_zero():
    probs = np.array([[1 - 1e-12, 1e-12]])
    assert cross_entropy(probs, np.array([0])) == pytest.approx(0.0, abs=1e-9)


def test_backward_label_validation():
    model = small_model()
    with pytest.raises(ConfigurationError):
        backward(model, np.zeros((1, 1, 8, 8)), np.array([7]))


def _loss(model, batch, labels, seed=123):
    probs = forward(model, batch, training=True, rng=np.random.default_rng(seed))
    return cross_entropy(probs, labels)


def _check_gradients(model, batch, labels, seed=123, eps=1e-5, tol=1e-4):
    grads, _ = backward(model, batch, labels, rng=np.random.default_rng(seed))
    max_rel = 0.0
    for param, grad in zip(model.parameters(), grads):
        for idx in np.ndindex(param.shape):
            orig = param[idx]
            param[idx] = orig + eps
            up = _loss(model, batch, labels, seed)
            param[idx] = orig - eps
            down = _loss(model, batch, labels, seed)
            param[idx] = orig
            fd = (up - down) / (2 * eps)
            rel = abs(grad[idx] - fd) / max(1.0, abs(grad[idx]), abs(fd))
            max_rel = max(max_rel, rel)
    return max_rel


def test_gradients_dense_softmax():
    rng = np.random.default_rng(6)
    model = CnnModel((1, 8, 8), [
        LayerSpec("dense", units=4, activation="tanh"),
        LayerSpec("dense", units=3, activation="linear"),
        LayerSpec("softmax"),
    ], seed=1)
    batch = rng.normal(size=(3, 1, 8, 8))
    labels = np.array([0, 2, 1])
    assert _check_gradients(model, batch, labels) < 1e-4


def test_gradients_conv_pool():
    rng = np.random.default_rng(7)
    model = CnnModel((2, 6, 6), [
        LayerSpec("conv", filters=2, kernel=(3, 3), activation="tanh"),
        LayerSpec("maxpool", pool=(2, 2)),
        LayerSpec("dense", units=2, activation="linear"),
        LayerSpec("softmax"),
    ], seed=2)
    batch = rng.normal(size=(2, 2, 6, 6))
    labels = np.array([0, 1])
    assert _check_gradients(model, batch, labels) < 1e-4


def test_gradients_full_stack_with_dropout():
    rng = np.random.default_rng(8)
    model = small_model(dropout_rate=0.3, seed=3)
    batch = rng.normal(size=(2, 1, 8, 8))
    labels = np.array([2, 0])
    assert _check_gradients(model, batch, labels) < 1e-4


def test_softmax_cross_entropy_combined_gradient():
    rng = np.random.default_rng(9)
    model = CnnModel((1, 8, 8), [
        LayerSpec("dense", units=3, activation="linear"),
        LayerSpec("softmax"),
    ], seed=4)
    batch = rng.normal(size=(4, 1, 8, 8))
    labels = np.array([0, 1, 2, 0])
    probs = forward(model, batch)
    onehot = np.zeros_like(probs)
    onehot[np.arange(4), labels] = 1.0
    expected_dlogits = (probs - onehot) / 4
    # verify via the dense layer's gradient: dW = dlogits^T @ flat_input
    grads, _ = backward(model, batch, labels)
    flat = batch.reshape(4, -1)
    assert np.allclose(grads[0], expected_dlogits.T @ flat, atol=1e-12)


def test_maxpool_backward_routes_to_argmax_only():
    model = CnnModel((1, 4, 4), [
        LayerSpec("maxpool", pool=(2, 2)),
        LayerSpec("dense", units=2, activation="linear"),
        LayerSpec("softmax"),
    ], seed=5)
    rng = np.random.default_rng(10)
    batch = rng.normal(size=(1, 1, 4, 4))
    probs = forward(model, batch, training=True)
    grad = probs.copy()
    grad[0, 0] -= 1.0
    pooled_grad = model.layers[1].backward(grad)
    dx = model.layers[0].backward(pooled_grad)
    # each 2x2 window passes its single routed gradient through unchanged
    for i in range(2):
        for j in range(2):
            window = dx[0, 0, 2 * i : 2 * i + 2, 2 * j : 2 * j + 2]
            assert np.count_nonzero(window) <= 1
            assert window.sum() == pytest.approx(pooled_grad[0, 0, i, j])


# -- training ------------------------------------------------------------------------------

def test_train_zero_step_size_keeps_parameters():
    rng = np.random.default_rng(11)
    model = small_model(seed=6)
    before = [p.copy() for p in model.parameters()]
    x = rng.normal(size=(6, 1, 8, 8))
    y = rng.integers(0, 3, size=6)
    train_cnn(model, x, y, epochs=2, step_size=0.0, batch_size=3, seed=0)
    for prev, now in zip(before, model.parameters()):
        assert np.array_equal(prev, now)


def test_train_deterministic():
    rng = np.random.default_rng(12)
    x = rng.normal(size=(8, 1, 8, 8))
    y = rng.integers(0, 3, size=8)
    _, t1 = train_cnn(small_model(seed=7), x, y, epochs=3, step_size=0.05, batch_size=4, seed=1)
    _, t2 = train_cnn(small_model(seed=7), x, y, epochs=3, step_size=0.05, batch_size=4, seed=1)
    assert t1 == t2


def test_overfits_toy_set():
    rng = np.random.default_rng(13)
    n = 20
    labels = np.array([0, 1] * (n // 2))
    x = rng.normal(size=(n, 1, 8, 8)) + labels[:, None, None, None] * 1.0
    model = CnnModel((1, 8, 8), [
        LayerSpec("conv", filters=4, kernel=(3, 3), activation="tanh"),
        LayerSpec("maxpool", pool=(2, 2)),
        LayerSpec("dense", units=8, activation="tanh"),
        LayerSpec("dense", units=2, activation="linear"),
        LayerSpec("softmax"),
    ], seed=8)
    model, trace = train_cnn(model, x, labels, epochs=300, step_size=0.1, batch_size=10, seed=2)
    assert accuracy(model, x, labels) >= 0.95
    assert trace[-1] < trace[0]


# -- builder --------------------------------------------------------------------------------

def test_build_some_cnn_shapes():
    model = build_some_cnn((2, 24, 24))
    conv1 = model.layers[0]
    assert conv1.out_shape((2, 24, 24)) == (71, 22, 22)
    assert model.output_shape == (2,)


def test_build_some_cnn_layer_order():
    model = build_some_cnn((2, 24, 24), num_classes=6)
    kinds = [s.kind for s in model.specs]
    assert kinds == ["conv", "maxpool", "conv", "maxpool", "dropout", "dense", "dense", "softmax"]
    assert model.specs[0].filters == 71 and model.specs[0].kernel == (3, 3)
    assert model.specs[2].filters == 88 and model.specs[2].kernel == (2, 2)
    assert model.specs[5].units == 26
    rates = [s.rate for s in model.specs if s.kind == "dropout"]
    assert rates == [0.5]


def test_build_some_cnn_rejects_small_input():
    with pytest.raises(ShapeError):
        build_some_cnn((2, 7, 24))


def test_build_some_cnn_parameter_count():
    model = build_some_cnn((2, 24, 24), num_classes=2)
    # conv1: 71*2*3*3 + 71; conv2: 88*71*2*2 + 88; dense 26: 26*88*5*5 + 26;
    # dense 2: 2*26 + 2
    expected = (71 * 2 * 9 + 71) + (88 * 71 * 4 + 88) + (26 * 88 * 25 + 26) + (2 * 26 + 2)
    assert sum(p.size for p in model.parameters()) == expected
