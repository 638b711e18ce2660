"""Toy experiment: a small ReLU classifier whose second hidden layer is tracked.

The network is ``fc1 -> ReLU -> fc2 -> ReLU -> [LayerNorm] -> fc3 -> softmax``
with widths ``input -> 20 -> hidden2 -> 2``. The output of the (optionally
normalized) second hidden layer is the embedding whose H0 persistence is
followed across training epochs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import H0SepError, MissingLabelsError
from .geometry import PointCloud
from .homology import h0_normalized
from .learners import auc_binary, log_softmax
from .synth import CounterRNG, SynthConfig, make_classification

LN_EPS = 1e-5
PARAM_ORDER = ("W1", "b1", "W2", "b2", "W3", "b3", "gain", "offset")


@dataclass(frozen=True)
class ToyNetConfig:
    input_dim: int
    hidden1: int = 20
    hidden2: int = 5
    use_layer_norm: bool = False
    seed: int = 0

    def __post_init__(self):
        if min(self.input_dim, self.hidden1, self.hidden2) < 1:
            raise H0SepError("all layer widths must be >= 1")


@dataclass(eq=False)
class ToyNet:
    config: ToyNetConfig
    params: dict

    @property
    def use_layer_norm(self) -> bool:
        return self.config.use_layer_norm


def init_toy_net(cfg: ToyNetConfig) -> ToyNet:
    """Weights and biases uniform in +-1/sqrt(fan_in); LayerNorm gain 1, offset 0.

    Layer ``l`` (1-based) draws its weights from stream ``2l`` and its biases
    from stream ``2l + 1`` of ``CounterRNG(cfg.seed)``.
    """
    rng = CounterRNG(cfg.seed)
    shapes = [(cfg.hidden1, cfg.input_dim), (cfg.hidden2, cfg.hidden1), (2, cfg.hidden2)]
    params = {}
    for layer, (fan_out, fan_in) in enumerate(shapes, start=1):
        bound = 1.0 / np.sqrt(fan_in)
        w = rng.uniform(2 * layer, fan_out * fan_in)
        b = rng.uniform(2 * layer + 1, fan_out)
        params[f"W{layer}"] = ((2.0 * w - 1.0) * bound).reshape(fan_out, fan_in)
        params[f"b{layer}"] = (2.0 * b - 1.0) * bound
    if cfg.use_layer_norm:
        params["gain"] = np.ones(cfg.hidden2)
        params["offset"] = np.zeros(cfg.hidden2)
    return ToyNet(cfg, params)


def layer_norm(v, gain, offset, eps: float = LN_EPS) -> np.ndarray:
    """Normalize the last axis to zero mean, unit (population) variance."""
    v = np.asarray(v, dtype=np.float64)
    mu = v.mean(axis=-1, keepdims=True)
    var = ((v - mu) ** 2).mean(axis=-1, keepdims=True)
    return (v - mu) / np.sqrt(var + eps) * gain + offset


def _forward(net: ToyNet, X: np.ndarray) -> dict:
    p = net.params
    z1 = X @ p["W1"].T + p["b1"]
    a1 = np.maximum(z1, 0.0)
    z2 = a1 @ p["W2"].T + p["b2"]
    a2 = np.maximum(z2, 0.0)
    cache = {"X": X, "z1": z1, "a1": a1, "z2": z2, "a2": a2}
    if net.use_layer_norm:
        mu = a2.mean(axis=1, keepdims=True)
        var = ((a2 - mu) ** 2).mean(axis=1, keepdims=True)
        inv_std = 1.0 / np.sqrt(var + LN_EPS)
        xhat = (a2 - mu) * inv_std
        h = xhat * p["gain"] + p["offset"]
        cache.update(xhat=xhat, inv_std=inv_std)
    else:
        h = a2
    cache["h"] = h
    cache["logits"] = h @ p["W3"].T + p["b3"]
    return cache


def _points(data) -> np.ndarray:
    if isinstance(data, PointCloud):
        return data.points
    return np.atleast_2d(np.asarray(data, dtype=np.float64))


def _check_dim(net: ToyNet, X: np.ndarray):
    if X.shape[1] != net.config.input_dim:
        raise H0SepError(
            f"input dimension {X.shape[1]} does not match network input {net.config.input_dim}"
        )


def encode(net: ToyNet, pc) -> PointCloud:
    """Second-hidden-layer activations (after LayerNorm when enabled)."""
    X = _points(pc)
    _check_dim(net, X)
    labels = pc.labels if isinstance(pc, PointCloud) else None
    return PointCloud(_forward(net, X)["h"], labels)


def predict_proba(net: ToyNet, pc) -> np.ndarray:
    X = _points(pc)
    _check_dim(net, X)
    return np.exp(log_softmax(_forward(net, X)["logits"]))


def loss_and_grads(net: ToyNet, X: np.ndarray, y: np.ndarray):
    """Mean cross-entropy over the batch and its gradient for every parameter."""
    p = net.params
    c = _forward(net, X)
    n = X.shape[0]
    logp = log_softmax(c["logits"])
    loss = -float(logp[np.arange(n), y].sum()) / n

    dlogits = np.exp(logp)
    dlogits[np.arange(n), y] -= 1.0
    dlogits /= n
    g = {"W3": dlogits.T @ c["h"], "b3": dlogits.sum(axis=0)}
    dh = dlogits @ p["W3"]
    if net.use_layer_norm:
        xhat = c["xhat"]
        g["gain"] = (dh * xhat).sum(axis=0)
        g["offset"] = dh.sum(axis=0)
        dxhat = dh * p["gain"]
        width = xhat.shape[1]
        da2 = (c["inv_std"] / width) * (
            width * dxhat
            - dxhat.sum(axis=1, keepdims=True)
            - xhat * (dxhat * xhat).sum(axis=1, keepdims=True)
        )
    else:
        da2 = dh
    dz2 = da2 * (c["z2"] > 0)
    g["W2"] = dz2.T @ c["a1"]
    g["b2"] = dz2.sum(axis=0)
    dz1 = (dz2 @ p["W2"]) * (c["z1"] > 0)
    g["W1"] = dz1.T @ X
    g["b1"] = dz1.sum(axis=0)
    return loss, g


class Adam:
    """Adam with bias correction; updates parameter arrays in place."""

    def __init__(self, lr: float = 1e-2, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m: dict = {}
        self.v: dict = {}

    def step(self, params: dict, grads: dict):
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for name, g in grads.items():
            m = self.m.setdefault(name, np.zeros_like(g))
            v = self.v.setdefault(name, np.zeros_like(g))
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            params[name] -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


@dataclass(eq=False)
class EmbeddingTrace:
    """Per-epoch embeddings of the tracking set, training loss and tracking AUC.

    Index 0 is the untrained network.
    """

    epochs: list = field(default_factory=list)
    clouds: list = field(default_factory=list)
    losses: list = field(default_factory=list)
    aucs: list = field(default_factory=list)
    net: ToyNet | None = None

    def __len__(self) -> int:
        return len(self.epochs)

    @property
    def final(self) -> PointCloud:
        return self.clouds[-1]


def _binary_labels(pc: PointCloud, what: str) -> np.ndarray:
    if pc.labels is None:
        raise MissingLabelsError(f"{what} set must be labeled")
    y = pc.labels
    if np.any((y != 0) & (y != 1)):
        raise H0SepError(f"{what} labels must be 0/1 for the two-way output")
    return y


def train_toy(
    cfg: ToyNetConfig,
    train: PointCloud,
    track: PointCloud,
    epochs: int = 100,
    lr: float = 1e-2,
) -> EmbeddingTrace:
    """Full-batch Adam on cross-entropy, recording ``encode(track)`` each epoch."""
    y_train = _binary_labels(train, "training")
    y_track = _binary_labels(track, "tracking")
    if np.unique(y_train).size < 2:
        raise H0SepError("training labels need both classes")
    if train.d != cfg.input_dim or track.d != cfg.input_dim:
        raise H0SepError("train/track dimension does not match input_dim")
    track_has_both = np.unique(y_track).size == 2

    net = init_toy_net(cfg)
    opt = Adam(lr)
    trace = EmbeddingTrace()
    X = train.points
    for epoch in range(epochs + 1):
        loss, grads = loss_and_grads(net, X, y_train)
        trace.epochs.append(epoch)
        trace.losses.append(loss)
        trace.clouds.append(encode(net, track))
        if track_has_both:
            trace.aucs.append(auc_binary(predict_proba(net, track)[:, 1], y_track))
        else:
            trace.aucs.append(float("nan"))
        if epoch < epochs:
            opt.step(net.params, grads)
    trace.net = net
    return trace


# --------------------------------------------------------------------------
# experiment drivers

def toy_dataset_config(
    seed: int,
    class_sep: float = 0.5,
    clusters_per_class: int | None = None,
    n_samples: int = 2000,
    n_features: int = 40,
) -> SynthConfig:
    """Binary toy dataset; clusters per class drawn from {1, 2, 3} when not given."""
    if clusters_per_class is None:
        clusters_per_class = 1 + int(CounterRNG(seed).uniform(0, 1)[0] * 3)
    return SynthConfig(n_samples, n_features, 2, clusters_per_class, class_sep, seed)


def split_halves(pc: PointCloud):
    """First half for training, second half for tracking (data arrive shuffled)."""
    half = pc.n // 2
    return pc.subset(slice(0, half)), pc.subset(slice(half, pc.n))


@dataclass(eq=False)
class ToyRun:
    dataset_seed: int
    layer_norm: bool
    synth: SynthConfig
    trace: EmbeddingTrace

    @property
    def final_auc(self) -> float:
        return self.trace.aucs[-1]

    def normalized_persistences(self, index: int = -1) -> np.ndarray:
        return h0_normalized(self.trace.clouds[index]).values


def run_toy(
    synth_cfg: SynthConfig,
    layer_norm: bool,
    epochs: int = 100,
    lr: float = 1e-2,
    net_seed: int | None = None,
) -> ToyRun:
    train, track = split_halves(make_classification(synth_cfg))
    cfg = ToyNetConfig(
        input_dim=synth_cfg.n_features,
        use_layer_norm=layer_norm,
        seed=synth_cfg.seed if net_seed is None else net_seed,
    )
    return ToyRun(synth_cfg.seed, layer_norm, synth_cfg, train_toy(cfg, train, track, epochs, lr))
