import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import central_difference

from jcrlab import autoencoder as ae
from jcrlab.receiver import ReceiveRecord

seeds = st.integers(0, 2**32 - 1)


@given(seeds, st.integers(1, 4), st.integers(1, 8))
def test_vectorize_round_trip(seed, n_rx, t):
    rng = np.random.default_rng(seed)
    y = rng.standard_normal((n_rx, t)) + 1j * rng.standard_normal((n_rx, t))
    chi = ae.vectorize(y)
    assert chi.shape == (2 * n_rx * t,)
    assert np.allclose(ae.devectorize(chi, n_rx, t), y)
    with pytest.raises(ValueError):
        ae.devectorize(chi[:-1], n_rx, t)


def test_default_shape():
    assert ae.default_sizes(128) == [128, 85, 42, 128]


def test_network_validation():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        ae.AutoencoderNet.init([4, 3, 5], rng)
    with pytest.raises(ValueError):
        ae.AutoencoderNet([np.zeros((3, 4))], [np.zeros(2)])
    net = ae.AutoencoderNet.init([4, 3, 4], rng)
    with pytest.raises(ValueError):
        ae.forward(net, np.zeros(5))


@settings(max_examples=20, deadline=None)
@given(seeds, st.sampled_from([[4, 3, 4], [6, 4, 2, 6], [5, 8, 5]]))
def test_backprop_matches_finite_differences(seed, sizes):
    rng = np.random.default_rng(seed)
    net = ae.AutoencoderNet.init(sizes, rng, input_scale=rng.uniform(0.5, 2))
    # nonzero biases keep pre-activations off the rectifier kink, where no derivative exists
    for b in net.biases:
        b += 0.1 * rng.standard_normal(b.shape)
    x, t = rng.standard_normal((4, sizes[0])), rng.standard_normal((4, sizes[0]))
    value, grads = ae.loss_and_grad(net, x, t)
    assert np.isclose(value, ae.batch_loss(net, x, t))
    fd = central_difference(lambda: ae.loss_and_grad(net, x, t)[0], net.params())
    for g, f in zip(grads, fd):
        assert np.linalg.norm(g - f) <= 1e-4 * max(np.linalg.norm(f), 1e-8)


def test_single_sample_loss_is_squared_error():
    rng = np.random.default_rng(1)
    net = ae.AutoencoderNet.init([4, 2, 4], rng)
    x = rng.standard_normal(4)
    assert np.isclose(ae.loss(x, ae.forward(net, x)), ae.batch_loss(net, x[None], x[None]))


def low_rank_data(rng, n, dim, rank):
    basis = rng.standard_normal((rank, dim))
    return rng.standard_normal((n, rank)) @ basis


def test_identity_on_a_subspace_is_learnable():
    rng = np.random.default_rng(2)
    x = low_rank_data(rng, 600, 12, 2)
    net = ae.AutoencoderNet.init(ae.default_sizes(12), rng, ae.input_scale_for(x))
    res = ae.train(net, ae.TrainingSet(x, x), ae.TrainConfig(epochs=400, patience=100, learning_rate=3e-3))
    power = np.mean(np.sum(x * x, axis=1))
    assert min(res.val_loss) < 1e-3 * power


def test_training_keeps_best_validation_weights_and_is_deterministic():
    rng = np.random.default_rng(3)
    x = low_rank_data(rng, 200, 8, 3)
    y = x + 0.1 * rng.standard_normal(x.shape)
    data = ae.TrainingSet(y, x)
    net = ae.AutoencoderNet.init(ae.default_sizes(8), rng, ae.input_scale_for(y))
    before = net.copy()
    cfg = ae.TrainConfig(epochs=30, seed=7)
    a, b = ae.train(net, data, cfg), ae.train(net, data, cfg)
    assert a.train_loss == b.train_loss
    (_, _), (xv, tv) = data.split()
    assert np.isclose(ae.batch_loss(a.net, xv, tv), min(a.val_loss))
    assert a.val_loss[a.best_epoch] == min(a.val_loss)
    # the input network is left untouched
    assert all(np.array_equal(p, q) for p, q in zip(net.params(), before.params()))


def test_sgd_optimizer_reduces_loss():
    rng = np.random.default_rng(4)
    x = low_rank_data(rng, 200, 8, 2)
    net = ae.AutoencoderNet.init(ae.default_sizes(8), rng, ae.input_scale_for(x))
    res = ae.train(net, ae.TrainingSet(x, x), ae.TrainConfig(epochs=50, optimizer="sgd", learning_rate=1e-3))
    assert res.train_loss[-1] < res.train_loss[0]


def test_divergence_is_reported():
    rng = np.random.default_rng(5)
    x = 1e3 * rng.standard_normal((64, 6))
    net = ae.AutoencoderNet.init([6, 4, 6], rng)
    with pytest.raises(ae.TrainingDivergedError, match="learning rate"):
        ae.train(net, ae.TrainingSet(x, x), ae.TrainConfig(epochs=50, optimizer="sgd", learning_rate=10.0))


def test_split_and_config_validation():
    x = np.zeros((10, 4))
    (tr, _), (va, _) = ae.TrainingSet(x, x, 0.2).split()
    assert len(tr) == 8 and len(va) == 2
    (tr, _), (va, _) = ae.TrainingSet(x, x, 0.0).split()
    assert len(va) == 0
    with pytest.raises(ValueError):
        ae.TrainingSet(x, x[:5])
    with pytest.raises(ValueError):
        ae.TrainConfig(optimizer="rmsprop")
    with pytest.raises(ValueError):
        ae.TrainConfig(learning_rate=0)


def test_denoise_and_rmse():
    rng = np.random.default_rng(6)
    net = ae.AutoencoderNet.init([8, 4, 8], rng)
    y = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    rec = ae.denoise(net, ReceiveRecord(y, y))
    assert rec.samples.shape == y.shape
    assert ae.rmse(y, y) == 0
    assert np.isclose(ae.rmse(y, np.zeros_like(y)), np.sqrt(np.mean(np.abs(y) ** 2)))
    with pytest.raises(ValueError):
        ae.rmse(y, y[:1])


def test_weights_round_trip(tmp_path):
    net = ae.AutoencoderNet.init([6, 4, 2, 6], np.random.default_rng(7), input_scale=0.3)
    ae.save_weights(net, tmp_path / "w.bin")
    back = ae.load_weights(tmp_path / "w.bin")
    assert back.sizes == net.sizes and back.input_scale == net.input_scale
    for a, b in zip(net.params(), back.params()):
        assert np.array_equal(a, b)
    (tmp_path / "bad.bin").write_bytes(b"nope\n")
    with pytest.raises(ValueError):
        ae.load_weights(tmp_path / "bad.bin")
    raw = (tmp_path / "w.bin").read_bytes()
    (tmp_path / "cut.bin").write_bytes(raw[:-8])
    with pytest.raises(ValueError):
        ae.load_weights(tmp_path / "cut.bin")
