"""From-scratch multilayer perceptron for tomography regression.

Hidden layers use LeakyReLU (alpha = 0.5), the output layer is linear, and
training minimizes squared error with minibatch adagrad (eta = 0.5).  The
training gradient uses the mean-over-batch-and-output-dimensions reduction
(the convention of common deep-learning frameworks); with the sum-over-output
convention the eta = 0.5 runs diverge.  Targets may be scaled by a constant
before regression -- the tomography fidelity measure is invariant under
positive rescaling of the predicted vector, and scaling the trace component
to order one makes the adagrad updates well conditioned.

Checkpoints serialize as a JSON header followed by little-endian float64
arrays (W, b, G_W, G_b per layer) and round-trip bit-exactly.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field, asdict

import numpy as np

from .process import vec_to_chi
from .quantum import pauli_reconstruct, project_to_physical

ADAGRAD_EPS = 1e-8


@dataclass(frozen=True)
class NetworkConfig:
    layer_sizes: tuple[int, ...]
    alpha: float = 0.5  # LeakyReLU slope for negative inputs
    seed: int = 0

    def __post_init__(self):
        if len(self.layer_sizes) < 3:
            raise ValueError("need at least one hidden layer")
        if any(s < 1 for s in self.layer_sizes):
            raise ValueError("layer sizes must be positive")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 150
    batch_size: int = 32
    eta: float = 0.5
    optimizer: str = "adagrad"  # or "sgd" (test-only)
    accumulator_init: float = 0.1
    adagrad_eps: float = 1e-7
    target_scale: float = 1.0
    val_fraction: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.optimizer not in ("adagrad", "sgd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")


@dataclass
class NetworkParams:
    """Per-layer weights, biases and adagrad accumulators."""

    weights: list
    biases: list
    acc_w: list
    acc_b: list

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return tuple([self.weights[0].shape[0]] + [w.shape[1] for w in self.weights])


def init_network(cfg: NetworkConfig, rng: np.random.Generator) -> NetworkParams:
    """Uniform +-sqrt(6/(fan_in+fan_out)) weights, zero biases and accumulators."""
    weights, biases = [], []
    for fan_in, fan_out in zip(cfg.layer_sizes[:-1], cfg.layer_sizes[1:]):
        lim = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-lim, lim, (fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return NetworkParams(
        weights=weights,
        biases=biases,
        acc_w=[np.zeros_like(w) for w in weights],
        acc_b=[np.zeros_like(b) for b in biases],
    )


def leaky_relu(z: np.ndarray, alpha: float = 0.5) -> np.ndarray:
    return np.where(z > 0, z, alpha * z)


def forward(params: NetworkParams, x: np.ndarray, alpha: float = 0.5):
    """Network output and the per-layer activations needed for backprop.

    Accepts a single vector or a (batch, features) array.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        y, acts = forward(params, x[None, :], alpha)
        return y[0], [a[0] for a in acts]
    if x.shape[1] != params.weights[0].shape[0]:
        raise ValueError(f"input width {x.shape[1]} != {params.weights[0].shape[0]}")
    acts = [x]
    a = x
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = a @ w + b
        a = z if i == last else leaky_relu(z, alpha)
        acts.append(a)
    return a, acts


def backprop_grads(params: NetworkParams, x: np.ndarray, y_target: np.ndarray,
                   alpha: float = 0.5):
    """Exact gradients of the summed squared error over the given samples.

    Returns (grads_w, grads_b, loss) where loss = sum ||y - y_hat||^2.
    The LeakyReLU subgradient at exactly zero is taken as 1.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y_target = np.atleast_2d(np.asarray(y_target, dtype=float))
    y_hat, acts = forward(params, x, alpha)
    if y_hat.shape != y_target.shape:
        raise ValueError(f"target shape {y_target.shape} != output {y_hat.shape}")
    loss = float(((y_hat - y_target) ** 2).sum())
    delta = 2.0 * (y_hat - y_target)
    grads_w = [None] * len(params.weights)
    grads_b = [None] * len(params.biases)
    for li in range(len(params.weights) - 1, -1, -1):
        grads_w[li] = acts[li].T @ delta
        grads_b[li] = delta.sum(axis=0)
        if li > 0:
            # post-activation sign equals pre-activation sign for alpha > 0
            delta = (delta @ params.weights[li].T) * np.where(acts[li] >= 0, 1.0, alpha)
    return grads_w, grads_b, loss


def adagrad_step(params: NetworkParams, grads_w, grads_b, eta: float,
                 eps: float = ADAGRAD_EPS) -> None:
    """In-place adagrad update: G += g^2, theta -= eta * g / (sqrt(G) + eps)."""
    for li in range(len(params.weights)):
        params.acc_w[li] += grads_w[li] ** 2
        params.acc_b[li] += grads_b[li] ** 2
        params.weights[li] -= eta * grads_w[li] / (np.sqrt(params.acc_w[li]) + eps)
        params.biases[li] -= eta * grads_b[li] / (np.sqrt(params.acc_b[li]) + eps)


def sgd_step(params: NetworkParams, grads_w, grads_b, eta: float) -> None:
    for li in range(len(params.weights)):
        params.weights[li] -= eta * grads_w[li]
        params.biases[li] -= eta * grads_b[li]


def cosine_loss(y_hat: np.ndarray, y: np.ndarray) -> float:
    """arccos of the normalized dot product, in [0, pi]."""
    na, nb = np.linalg.norm(y_hat), np.linalg.norm(y)
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine loss undefined for zero vector")
    return float(np.arccos(np.clip(np.dot(y_hat, y) / (na * nb), -1.0, 1.0)))


def _mean_cosine_loss(params, xs, ys, alpha):
    y_hat, _ = forward(params, xs, alpha)
    num = np.einsum("ij,ij->i", y_hat, ys)
    den = np.linalg.norm(y_hat, axis=1) * np.linalg.norm(ys, axis=1)
    good = den > 0
    return float(np.mean(np.arccos(np.clip(num[good] / den[good], -1.0, 1.0))))


def train(params: NetworkParams, inputs: np.ndarray, targets: np.ndarray,
          tcfg: TrainConfig, alpha: float = 0.5):
    """Minibatch training loop; returns a per-epoch history.

    Targets are multiplied by ``tcfg.target_scale`` before regression.  Each
    update uses the squared-error gradient divided by (batch size x output
    width).  10% of the data (``val_fraction``) is held out and only used
    for the cosine-similarity validation curve.  History rows are dicts with
    ``epoch``, ``train_mse`` and ``val_cosine_loss``.
    """
    inputs = np.asarray(inputs, dtype=float)
    targets = np.asarray(targets, dtype=float) * tcfg.target_scale
    if len(inputs) == 0:
        raise ValueError("empty dataset")
    rng = np.random.default_rng(tcfg.seed)
    if tcfg.optimizer == "adagrad" and tcfg.accumulator_init:
        for li in range(len(params.weights)):
            params.acc_w[li][...] = tcfg.accumulator_init
            params.acc_b[li][...] = tcfg.accumulator_init

    n_val = int(len(inputs) * tcfg.val_fraction)
    order = rng.permutation(len(inputs))
    val_idx, train_idx = order[:n_val], order[n_val:]
    if len(train_idx) == 0:
        train_idx, val_idx = order, order[:0]
    x_tr, y_tr = inputs[train_idx], targets[train_idx]
    x_val, y_val = inputs[val_idx], targets[val_idx]

    out_dim = targets.shape[1]
    history = []
    for epoch in range(tcfg.epochs):
        perm = rng.permutation(len(x_tr))
        total_se = 0.0
        for s in range(0, len(perm), tcfg.batch_size):
            bi = perm[s : s + tcfg.batch_size]
            gw, gb, loss = backprop_grads(params, x_tr[bi], y_tr[bi], alpha)
            total_se += loss
            scale = 1.0 / (len(bi) * out_dim)
            gw = [g * scale for g in gw]
            gb = [g * scale for g in gb]
            if tcfg.optimizer == "adagrad":
                adagrad_step(params, gw, gb, tcfg.eta, tcfg.adagrad_eps)
            else:
                sgd_step(params, gw, gb, tcfg.eta)
        row = {
            "epoch": epoch,
            "train_mse": total_se / (len(x_tr) * out_dim),
            "val_cosine_loss": (
                _mean_cosine_loss(params, x_val, y_val, alpha) if len(x_val) else float("nan")
            ),
        }
        history.append(row)
    return history


def predict_state(params: NetworkParams, values: np.ndarray, n_qubits: int,
                  target_scale: float = 1.0, alpha: float = 0.5):
    """Predict a density matrix from a (possibly reduced) data vector.

    Returns (raw, physical): the raw Hermitian reconstruction used for the
    normalization-invariant fidelity, and its projection onto the physical
    set (eigenvalue clipping plus unit-trace renormalization).
    """
    y, _ = forward(params, np.asarray(values, dtype=float), alpha)
    coeffs = y / target_scale
    if len(coeffs) != 4**n_qubits:
        raise ValueError(f"output width {len(coeffs)} != 4^{n_qubits}")
    raw = pauli_reconstruct(coeffs)
    return raw, project_to_physical(raw)


def predict_process(params: NetworkParams, values: np.ndarray, n_qubits: int,
                    target_scale: float = 1.0, alpha: float = 0.5) -> np.ndarray:
    """Predict a (Hermitian) chi matrix from a possibly reduced lambda vector."""
    y, _ = forward(params, np.asarray(values, dtype=float), alpha)
    if len(y) != (4**n_qubits) ** 2:
        raise ValueError(f"output width {len(y)} != (4^{n_qubits})^2")
    return vec_to_chi(y / target_scale)


# ---------------------------------------------------------------------------
# Checkpoint serialization

_MAGIC = b"TNCK"
CHECKPOINT_VERSION = 1


def save_checkpoint(path, params: NetworkParams, cfg: NetworkConfig,
                    tcfg: TrainConfig, epochs_trained: int) -> None:
    header = {
        "version": CHECKPOINT_VERSION,
        "network": {"layer_sizes": list(cfg.layer_sizes), "alpha": cfg.alpha,
                    "seed": cfg.seed},
        "train": asdict(tcfg),
        "epochs_trained": epochs_trained,
    }
    raw = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<Q", len(raw)))
        fh.write(raw)
        for group in (params.weights, params.biases, params.acc_w, params.acc_b):
            for arr in group:
                fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_checkpoint(path):
    """Returns (params, cfg, tcfg, epochs_trained); bit-exact round trip."""
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise ValueError(f"{path}: not a checkpoint file")
        (hlen,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(hlen).decode())
        if header.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"{path}: unsupported checkpoint version")
        net = header["network"]
        cfg = NetworkConfig(tuple(net["layer_sizes"]), net["alpha"], net["seed"])
        tr = dict(header["train"])
        tcfg = TrainConfig(**tr)
        sizes = cfg.layer_sizes
        shapes_w = [(a, b) for a, b in zip(sizes[:-1], sizes[1:])]
        shapes_b = [(b,) for b in sizes[1:]]

        def read_group(shapes):
            out = []
            for shape in shapes:
                count = int(np.prod(shape))
                out.append(np.frombuffer(fh.read(count * 8), dtype="<f8").reshape(shape).copy())
            return out

        params = NetworkParams(
            weights=read_group(shapes_w),
            biases=read_group(shapes_b),
            acc_w=read_group(shapes_w),
            acc_b=read_group(shapes_b),
        )
    return params, cfg, tcfg, header["epochs_trained"]
