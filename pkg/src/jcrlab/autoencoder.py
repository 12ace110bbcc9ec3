"""Dense denoising autoencoder in plain numpy.

Records are flattened to real vectors [Re(y).ravel(), Im(y).ravel()]. The
network is a stack of affine layers with rectifier activations on every
hidden layer and a linear output; the default shape is
dim -> 2*dim/3 -> dim/3 -> dim. Training minimizes the per-sample squared
reconstruction error (batch mean) with Adam (or momentum SGD) and keeps
the weights of the best validation epoch.

Weight file layout::

    JCRLAB-AE 1\\n
    {"sizes": [...], "input_scale": s, "dtype": "<f8"}\\n
    payload: for each layer, W (out x in, row-major) then b, little-endian float64
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .receiver import ReceiveRecord

MAGIC = b"JCRLAB-AE 1\n"
OPTIMIZERS = ("sgd", "adam")
ADAM_BETAS = (0.9, 0.999)
ADAM_EPS = 1e-8


class TrainingDivergedError(RuntimeError):
    pass


def default_sizes(dim):
    return [dim, max(1, 2 * dim // 3), max(1, dim // 3), dim]


@dataclass(eq=False)
class AutoencoderNet:
    weights: list
    biases: list
    input_scale: float = 1.0

    def __post_init__(self):
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ValueError("need one bias per weight matrix and at least one layer")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape[0] != b.shape[0]:
                raise ValueError(f"layer {i}: weight rows {w.shape[0]} != bias length {b.shape[0]}")
            if i and w.shape[1] != self.weights[i - 1].shape[0]:
                raise ValueError(f"layer {i} input {w.shape[1]} != previous output")
        if self.sizes[0] != self.sizes[-1]:
            raise ValueError("autoencoder input and output dimensions differ")

    @classmethod
    def init(cls, sizes, rng, input_scale=1.0):
        """He-initialized weights, zero biases."""
        ws, bs = [], []
        for n_in, n_out in zip(sizes[:-1], sizes[1:]):
            ws.append(rng.standard_normal((n_out, n_in)) * np.sqrt(2.0 / n_in))
            bs.append(np.zeros(n_out))
        return cls(ws, bs, input_scale)

    @property
    def sizes(self):
        return [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]

    @property
    def dim(self):
        return self.sizes[0]

    def copy(self):
        return AutoencoderNet([w.copy() for w in self.weights], [b.copy() for b in self.biases],
                              self.input_scale)

    def params(self):
        return [p for pair in zip(self.weights, self.biases) for p in pair]


def vectorize(samples):
    samples = getattr(samples, "samples", samples)
    samples = np.asarray(samples)
    return np.concatenate([samples.real.ravel(), samples.imag.ravel()])


def devectorize(chi, n_rx, n_snapshots):
    chi = np.asarray(chi, float)
    n = n_rx * n_snapshots
    if chi.shape[-1] != 2 * n:
        raise ValueError(f"vector of length {chi.shape[-1]} does not hold {n_rx}x{n_snapshots} samples")
    out = chi[..., :n] + 1j * chi[..., n:]
    return out.reshape(chi.shape[:-1] + (n_rx, n_snapshots))


def _check_dim(net, x):
    if x.shape[-1] != net.dim:
        raise ValueError(f"input dimension {x.shape[-1]} != network dimension {net.dim}")


def _layers(net, x):
    """Pre-activations and activations for a (batch, dim) input."""
    acts = [x * net.input_scale]
    pre = []
    last = len(net.weights) - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = acts[-1] @ w.T + b
        pre.append(z)
        acts.append(z if i == last else np.maximum(z, 0.0))
    return pre, acts


def forward(net, chi):
    chi = np.asarray(chi, float)
    _check_dim(net, chi)
    x = np.atleast_2d(chi)
    out = _layers(net, x)[1][-1] / net.input_scale
    return out if chi.ndim > 1 else out[0]


def loss(chi, chi_out):
    d = np.asarray(chi, float) - np.asarray(chi_out, float)
    return float(np.sum(d * d))


def batch_loss(net, inputs, targets):
    d = forward(net, inputs) - targets
    return float(np.mean(np.sum(d * d, axis=-1)))


def loss_and_grad(net, inputs, targets):
    """Batch-mean squared error and its gradients, ordered like ``net.params()``."""
    x = np.atleast_2d(np.asarray(inputs, float))
    t = np.atleast_2d(np.asarray(targets, float))
    _check_dim(net, x)
    pre, acts = _layers(net, x)
    s = net.input_scale
    diff = acts[-1] / s - t
    n = x.shape[0]
    value = float(np.sum(diff * diff) / n)
    delta = 2.0 * diff / (s * n)
    grads = []
    for i in range(len(net.weights) - 1, -1, -1):
        grads.append(delta.sum(axis=0))
        grads.append(delta.T @ acts[i])
        if i:
            delta = (delta @ net.weights[i]) * (pre[i - 1] > 0)
    grads.reverse()
    return value, grads


@dataclass(eq=False)
class TrainingSet:
    inputs: np.ndarray
    targets: np.ndarray
    validation_fraction: float = 0.1

    def __post_init__(self):
        self.inputs = np.atleast_2d(np.asarray(self.inputs, float))
        self.targets = np.atleast_2d(np.asarray(self.targets, float))
        if self.inputs.shape != self.targets.shape:
            raise ValueError("inputs and targets are not aligned")
        if len(self.inputs) == 0:
            raise ValueError("training set is empty")
        if not 0 <= self.validation_fraction < 1:
            raise ValueError("validation_fraction must be in [0, 1)")

    @property
    def n_variations(self):
        return len(self.inputs)

    def split(self):
        """Last ``validation_fraction`` of the variations held out (at least one if any)."""
        n_val = int(round(self.validation_fraction * len(self.inputs)))
        if self.validation_fraction > 0:
            n_val = min(max(n_val, 1), len(self.inputs) - 1)
        cut = len(self.inputs) - n_val
        return (self.inputs[:cut], self.targets[:cut]), (self.inputs[cut:], self.targets[cut:])


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 200
    batch_size: int = 64
    learning_rate: float = 1e-3
    momentum: float = 0.9
    patience: int = 20
    seed: int = 0
    optimizer: str = "adam"

    def __post_init__(self):
        for name in ("epochs", "batch_size", "patience"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if not 0 <= self.momentum < 1:
            raise ValueError("momentum must be in [0, 1)")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"optimizer must be one of {OPTIMIZERS}")


@dataclass(eq=False)
class TrainResult:
    net: AutoencoderNet
    train_loss: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)
    best_epoch: int = 0


def input_scale_for(inputs):
    rms = np.sqrt(np.mean(np.square(inputs)))
    return 1.0 / rms if rms > 0 else 1.0


def train(net, data, cfg=TrainConfig()):
    """Minibatch descent on the reconstruction loss; ``net`` is left untouched."""
    rng = np.random.default_rng(cfg.seed)
    (x_tr, t_tr), (x_va, t_va) = data.split()
    has_val = len(x_va) > 0
    net = net.copy()
    vel = [np.zeros_like(p) for p in net.params()]
    sq = [np.zeros_like(p) for p in net.params()]
    step = 0
    best = net.copy()
    best_val = np.inf
    result = TrainResult(best)
    stale = 0
    # overflow in a diverging run is reported below, not warned about
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(cfg.epochs):
            order = rng.permutation(len(x_tr))
            for start in range(0, len(order), cfg.batch_size):
                idx = order[start:start + cfg.batch_size]
                _, grads = loss_and_grad(net, x_tr[idx], t_tr[idx])
                step += 1
                if cfg.optimizer == "sgd":
                    for p, v, g in zip(net.params(), vel, grads):
                        v *= cfg.momentum
                        v -= cfg.learning_rate * g
                        p += v
                    continue
                b1, b2 = ADAM_BETAS
                lr = cfg.learning_rate * np.sqrt(1 - b2 ** step) / (1 - b1 ** step)
                for p, m, v, g in zip(net.params(), vel, sq, grads):
                    m *= b1
                    m += (1 - b1) * g
                    v *= b2
                    v += (1 - b2) * g * g
                    p -= lr * m / (np.sqrt(v) + ADAM_EPS)
            tr = batch_loss(net, x_tr, t_tr)
            va = batch_loss(net, x_va, t_va) if has_val else tr
            if not (np.isfinite(tr) and np.isfinite(va)):
                raise TrainingDivergedError(
                    f"loss became non-finite at epoch {epoch}; lower the learning rate "
                    f"(now {cfg.learning_rate}) or rescale the inputs")
            result.train_loss.append(tr)
            result.val_loss.append(va)
            if va < best_val:
                best_val, best, stale = va, net.copy(), 0
                result.best_epoch = epoch
            else:
                stale += 1
                if stale >= cfg.patience:
                    break
    result.net = best
    return result


def denoise(net, record):
    samples = getattr(record, "samples", record)
    est = devectorize(forward(net, vectorize(samples)), *samples.shape)
    clean = getattr(record, "clean", np.zeros_like(est))
    return ReceiveRecord(est, clean)


def rmse(estimate, truth):
    estimate, truth = np.asarray(estimate), np.asarray(truth)
    if estimate.shape != truth.shape:
        raise ValueError(f"shape mismatch {estimate.shape} vs {truth.shape}")
    return float(np.sqrt(np.mean(np.abs(estimate - truth) ** 2)))


def save_weights(net, path):
    header = {"sizes": net.sizes, "input_scale": net.input_scale, "dtype": "<f8"}
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(json.dumps(header).encode() + b"\n")
        for w, b in zip(net.weights, net.biases):
            f.write(np.ascontiguousarray(w, dtype="<f8").tobytes())
            f.write(np.ascontiguousarray(b, dtype="<f8").tobytes())


def load_weights(path):
    with open(path, "rb") as f:
        if f.readline() != MAGIC:
            raise ValueError(f"{path}: not an autoencoder weight file")
        header = json.loads(f.readline())
        payload = np.frombuffer(f.read(), dtype="<f8")
    sizes = header["sizes"]
    ws, bs, pos = [], [], 0
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        ws.append(payload[pos:pos + n_in * n_out].reshape(n_out, n_in).copy())
        pos += n_in * n_out
        bs.append(payload[pos:pos + n_out].copy())
        pos += n_out
    if pos != payload.size:
        raise ValueError(f"{path}: payload has {payload.size} values, header implies {pos}")
    return AutoencoderNet(ws, bs, float(header["input_scale"]))
