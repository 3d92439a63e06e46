"""Feed-forward heuristic classifiers trained with cross-entropy or CEA.

Heuristic value ``v`` is class ``v + 1`` (column ``v`` of the probability
matrix).  The admissibility loss for a sample whose true value is ``v`` is::

    -log( sum_{j <= v} ((j + 1) / (v + 1)) ** beta * p_j )  +  eta * -log p_v

Both terms are evaluated in log space from the logits.
"""
from __future__ import annotations

import copy
import logging
import struct
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)

MAGIC = b"ANET"
FORMAT_VERSION = 1


class NonFiniteError(FloatingPointError):
    pass


class TrainingDiverged(RuntimeError):
    def __init__(self, epoch: int, checkpoint: "Network"):
        super().__init__(f"loss became non-finite in epoch {epoch}")
        self.epoch = epoch
        self.checkpoint = checkpoint


@dataclass(frozen=True)
class NetworkArchitecture:
    input_width: int
    hidden: tuple[int, ...]
    classes: int

    def __post_init__(self):
        if self.input_width < 1 or any(w < 1 for w in self.hidden):
            raise ValueError("all widths must be >= 1")
        if self.classes < 2:
            raise ValueError("need at least two classes")

    @property
    def widths(self) -> tuple[int, ...]:
        return (self.input_width, *self.hidden, self.classes)

    @property
    def depth(self) -> int:
        return len(self.hidden)

    @property
    def size(self) -> int:
        return sum(self.hidden)

    @property
    def parameter_count(self) -> int:
        w = self.widths
        return sum((w[i] + 1) * w[i + 1] for i in range(len(w) - 1))


@dataclass
class Network:
    arch: NetworkArchitecture
    weights: list[np.ndarray]  # (in, out) per layer
    biases: list[np.ndarray]

    @property
    def dtype(self):
        return self.weights[0].dtype

    def params(self) -> list[np.ndarray]:
        return [*self.weights, *self.biases]

    def copy(self) -> "Network":
        return Network(self.arch, [w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def astype(self, dtype) -> "Network":
        return Network(self.arch, [w.astype(dtype) for w in self.weights],
                       [b.astype(dtype) for b in self.biases])

    def nbytes(self) -> int:
        return sum(p.nbytes for p in self.params())


def init_network(arch: NetworkArchitecture, seed: int, dtype=np.float32) -> Network:
    """He-normal weights, zero biases."""
    rng = np.random.default_rng(seed)
    w = arch.widths
    weights = [(rng.standard_normal((w[i], w[i + 1])) * np.sqrt(2.0 / w[i])).astype(dtype)
               for i in range(len(w) - 1)]
    biases = [np.zeros(w[i + 1], dtype=dtype) for i in range(len(w) - 1)]
    return Network(arch, weights, biases)


@dataclass
class LossConfig:
    mode: str = "cea"
    beta: float = 1.0
    eta: float = 0.01

    def __post_init__(self):
        if self.mode not in ("ce", "cea"):
            raise ValueError(f"unknown loss mode {self.mode!r}")
        if not (np.isfinite(self.beta) and np.isfinite(self.eta)):
            raise ValueError("beta and eta must be finite")
        if self.mode == "cea" and self.beta <= 0:
            raise ValueError("CEA needs beta > 0")
        if self.eta < 0:
            raise ValueError("eta must be >= 0")


# ---------------------------------------------------------------------------
# forward / losses / backward
# ---------------------------------------------------------------------------

def _compute_dtype(net: Network):
    # half-precision storage is evaluated in single precision
    return np.float32 if net.dtype == np.float16 else net.dtype


def forward_logits(net: Network, x: np.ndarray, keep: bool = False):
    dt = _compute_dtype(net)
    a = np.asarray(x, dtype=dt)
    cache = [a]
    last = len(net.weights) - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = a @ w.astype(dt, copy=False) + b.astype(dt, copy=False)
        if not np.all(np.isfinite(z)):
            raise NonFiniteError(f"non-finite activations in layer {i + 1}")
        a = z if i == last else np.maximum(z, 0)
        if keep and i != last:
            cache.append(a)
    return (a, cache) if keep else a


def log_softmax(z: np.ndarray) -> np.ndarray:
    m = z.max(axis=1, keepdims=True)
    s = z - m
    return s - np.log(np.exp(s).sum(axis=1, keepdims=True))


def softmax(z: np.ndarray) -> np.ndarray:
    return np.exp(log_softmax(z))


def forward(net: Network, x: np.ndarray) -> np.ndarray:
    """Class probabilities, one row per input."""
    return softmax(forward_logits(net, x))


def ce_loss(p: np.ndarray, y: np.ndarray) -> float:
    p = np.atleast_2d(p)
    y = np.atleast_1d(y)
    return float(-np.mean(np.log(np.maximum(p[np.arange(len(y)), y], 1e-38))))


def _cea_weights(y: np.ndarray, classes: int, beta: float, dtype=np.float64) -> np.ndarray:
    j = np.arange(classes)[None, :]
    v = y[:, None]
    with np.errstate(divide="ignore"):
        w = ((j + 1) / (v + 1)).astype(dtype) ** beta
    return np.where(j <= v, w, 0)


def cea_loss(p: np.ndarray, y: np.ndarray, config: LossConfig) -> float:
    """Batch-mean CEA loss from probabilities (``y`` holds heuristic values)."""
    p = np.atleast_2d(np.asarray(p, dtype=np.float64))
    y = np.atleast_1d(y)
    w = _cea_weights(y, p.shape[1], config.beta)
    s = np.maximum((w * p).sum(axis=1), 1e-38)
    pt = np.maximum(p[np.arange(len(y)), y], 1e-38)
    return float(np.mean(-np.log(s) - config.eta * np.log(pt)))


def loss_and_logit_grad(z: np.ndarray, y: np.ndarray, config: LossConfig):
    """Batch-mean loss and its gradient with respect to the logits."""
    n, classes = z.shape
    rows = np.arange(n)
    lp = log_softmax(z)
    p = np.exp(lp)
    onehot = np.zeros_like(z)
    onehot[rows, y] = 1
    if config.mode == "ce":
        loss = -lp[rows, y].mean()
        grad = p - onehot
    else:
        j = np.arange(classes)[None, :]
        admissible = j <= y[:, None]
        logw = np.where(admissible, config.beta * np.log((j + 1) / (y[:, None] + 1.0),
                                                         where=admissible,
                                                         out=np.zeros(z.shape)), -np.inf)
        t = (logw + lp).astype(z.dtype)
        tm = t.max(axis=1, keepdims=True)
        log_s = tm[:, 0] + np.log(np.exp(t - tm).sum(axis=1))
        q = np.exp(t - log_s[:, None])  # posterior over admissible classes
        loss = (-log_s - config.eta * lp[rows, y]).mean()
        grad = (1 + config.eta) * p - q - config.eta * onehot
    return float(loss), (grad / n).astype(z.dtype)


def loss_value(net: Network, x: np.ndarray, y: np.ndarray, config: LossConfig) -> float:
    return loss_and_logit_grad(forward_logits(net, x), np.asarray(y), config)[0]


@dataclass
class Gradients:
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    loss: float

    def params(self) -> list[np.ndarray]:
        return [*self.weights, *self.biases]


def backward(net: Network, x: np.ndarray, y: np.ndarray, config: LossConfig) -> Gradients:
    """Exact gradients of the batch-mean loss for every weight and bias."""
    z, acts = forward_logits(net, x, keep=True)
    loss, delta = loss_and_logit_grad(z, np.asarray(y), config)
    gw = [None] * len(net.weights)
    gb = [None] * len(net.weights)
    for i in range(len(net.weights) - 1, -1, -1):
        gw[i] = acts[i].T @ delta
        gb[i] = delta.sum(axis=0)
        if i:
            delta = (delta @ net.weights[i].T) * (acts[i] > 0)
    for g in gw + gb:
        if not np.all(np.isfinite(g)):
            raise NonFiniteError("non-finite gradient")
    return Gradients(gw, gb, loss)


def predict(net: Network, x: np.ndarray, batch: int = 65536) -> np.ndarray:
    """Heuristic values: argmax class, ties to the lower value."""
    out = np.empty(len(x), dtype=np.int64)
    for s in range(0, len(x), batch):
        out[s:s + batch] = np.argmax(forward_logits(net, x[s:s + batch]), axis=1)
    return out


def predict_heuristic(net: Network, state, pattern) -> int:
    from .encoding import encode_one_hot
    return int(predict(net, encode_one_hot(state, pattern)[None, :])[0])


def quantize_half(net: Network) -> Network:
    return net.astype(np.float16)


# ---------------------------------------------------------------------------
# optimisers
# ---------------------------------------------------------------------------

class SGD:
    def __init__(self, lr: float):
        self.lr = lr

    def step(self, net: Network, grads: Gradients) -> None:
        for p, g in zip(net.params(), grads.params()):
            p -= (self.lr * g).astype(p.dtype)

    def state(self) -> dict:
        return {}

    def load_state(self, state: dict) -> None:
        pass


class Adam:
    def __init__(self, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m: list[np.ndarray] | None = None
        self.v: list[np.ndarray] | None = None

    def step(self, net: Network, grads: Gradients) -> None:
        params = net.params()
        if self.m is None:
            self.m = [np.zeros_like(p) for p in params]
            self.v = [np.zeros_like(p) for p in params]
        self.t += 1
        c1 = 1 - self.beta1 ** self.t
        c2 = 1 - self.beta2 ** self.t
        for p, g, m, v in zip(params, grads.params(), self.m, self.v):
            m *= self.beta1
            m += (1 - self.beta1) * g
            v *= self.beta2
            v += (1 - self.beta2) * g * g
            p -= (self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)).astype(p.dtype)

    def state(self) -> dict:
        return {"t": self.t, "m": self.m, "v": self.v}

    def load_state(self, state: dict) -> None:
        self.t = int(state["t"])
        self.m = state["m"]
        self.v = state["v"]


# ---------------------------------------------------------------------------
# (beta, eta) schedule and training loop
# ---------------------------------------------------------------------------

@dataclass
class Schedule:
    """Halve beta and eta after ``window`` epochs without a new best loss or
    a new best overestimation rate."""

    window: int = 20
    factor: float = 0.5
    enabled: bool = True
    best_loss: float = np.inf
    best_over: float = np.inf
    stale: int = 0
    phases: list = field(default_factory=list)

    def update(self, epoch: int, loss: float, over: float, config: LossConfig) -> LossConfig:
        improved = False
        if loss < self.best_loss:
            self.best_loss, improved = loss, True
        if over < self.best_over:
            self.best_over, improved = over, True
        self.stale = 0 if improved else self.stale + 1
        if not self.enabled or config.mode != "cea" or self.stale < self.window:
            return config
        self.stale = 0
        self.best_loss = np.inf
        new = replace(config, beta=config.beta * self.factor, eta=config.eta * self.factor)
        self.phases.append((epoch, new.beta, new.eta))
        log.info("epoch %d: no progress for %d epochs, beta=%g eta=%g",
                 epoch, self.window, new.beta, new.eta)
        return new


@dataclass
class TrainConfig:
    epochs: int = 200
    batch_size: int = 4096
    lr: float = 1e-3
    optimizer: str = "adam"
    seed: int = 0
    hidden: tuple[int, ...] = (512, 512)
    loss: LossConfig = field(default_factory=LossConfig)
    schedule_window: int = 20
    schedule_enabled: bool = True
    lr_decay: str = "none"  # or "cosine": anneal towards 0 over ``epochs``

    def lr_at(self, epoch: int) -> float:
        if self.lr_decay == "cosine":
            return self.lr * 0.5 * (1 + np.cos(np.pi * (epoch - 1) / self.epochs))
        return self.lr


@dataclass
class EpochRecord:
    epoch: int
    loss: float
    overestimation_rate: float
    beta: float
    eta: float
    avg_predicted_h: float


@dataclass
class TrainState:
    """Everything needed to continue a run bit-exactly."""

    net: Network
    optimizer: object
    schedule: Schedule
    loss: LossConfig
    epoch: int = 0
    history: list[EpochRecord] = field(default_factory=list)


def make_optimizer(cfg: TrainConfig):
    return Adam(cfg.lr) if cfg.optimizer == "adam" else SGD(cfg.lr)


def start_training(x: np.ndarray, y: np.ndarray, cfg: TrainConfig, classes: int | None = None) -> TrainState:
    classes = classes or int(y.max()) + 1
    arch = NetworkArchitecture(x.shape[1], tuple(cfg.hidden), max(classes, 2))
    return TrainState(init_network(arch, cfg.seed), make_optimizer(cfg),
                      Schedule(cfg.schedule_window, enabled=cfg.schedule_enabled),
                      copy.copy(cfg.loss))


def train(x: np.ndarray, y: np.ndarray, cfg: TrainConfig, eval_x: np.ndarray | None = None,
          eval_y: np.ndarray | None = None, state: TrainState | None = None,
          stop_epoch: int | None = None, classes: int | None = None) -> TrainState:
    """Minibatch training; the shuffle of epoch ``e`` is drawn from
    ``default_rng([seed, e])`` so a resumed run replays the same batches."""
    y = np.asarray(y, dtype=np.int64)
    if eval_x is None:
        eval_x, eval_y = x, y
    state = state or start_training(x, y, cfg, classes)
    stop = cfg.epochs if stop_epoch is None else min(stop_epoch, cfg.epochs)
    dtype = state.net.dtype
    while state.epoch < stop:
        epoch = state.epoch + 1
        last_good = state.net.copy()
        state.optimizer.lr = cfg.lr_at(epoch)
        order = np.random.default_rng([cfg.seed, epoch]).permutation(len(x))
        total = 0.0
        for s in range(0, len(order), cfg.batch_size):
            idx = order[s:s + cfg.batch_size]
            try:
                grads = backward(state.net, x[idx].astype(dtype, copy=False), y[idx], state.loss)
            except NonFiniteError:
                raise TrainingDiverged(epoch, last_good) from None
            if not np.isfinite(grads.loss):
                raise TrainingDiverged(epoch, last_good)
            total += grads.loss * len(idx)
            state.optimizer.step(state.net, grads)
        pred = predict(state.net, eval_x)
        over = float(np.mean(pred > eval_y))
        mean_loss = total / len(order)
        state.history.append(EpochRecord(epoch, mean_loss, over, state.loss.beta, state.loss.eta,
                                          float(pred.mean())))
        log.debug("epoch %d loss %.5f over %.3g avg %.3f", epoch, mean_loss, over, pred.mean())
        state.loss = state.schedule.update(epoch, mean_loss, over, state.loss)
        state.epoch = epoch
    return state


def write_log_csv(history: list[EpochRecord], path: str | Path, header: list[str] = ()) -> None:
    with open(path, "w", newline="") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        fh.write("epoch,loss,overestimation_rate,beta,eta,avg_predicted_h\n")
        for r in history:
            fh.write(f"{r.epoch},{r.loss!r},{r.overestimation_rate!r},{r.beta!r},{r.eta!r},"
                     f"{r.avg_predicted_h!r}\n")


# ---------------------------------------------------------------------------
# model files
# ---------------------------------------------------------------------------

def save_model(net: Network, path: str | Path) -> int:
    precision = 16 if net.dtype == np.float16 else 32
    dt = np.dtype("<f2") if precision == 16 else np.dtype("<f4")
    widths = net.arch.widths
    head = MAGIC + struct.pack("<HBB", FORMAT_VERSION, precision, len(net.weights))
    head += struct.pack(f"<{len(widths)}I", *widths)
    body = b"".join(
        np.ascontiguousarray(w.T, dtype=dt).tobytes() + np.asarray(b, dtype=dt).tobytes()
        for w, b in zip(net.weights, net.biases))
    with open(path, "wb") as fh:
        fh.write(head + body)
    return len(head) + len(body)


def load_model(path: str | Path) -> Network:
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise ValueError(f"{path}: not a model file")
    version, precision, layers = struct.unpack_from("<HBB", data, 4)
    if version != FORMAT_VERSION or precision not in (16, 32):
        raise ValueError(f"{path}: unsupported version/precision {version}/{precision}")
    off = 8
    widths = struct.unpack_from(f"<{layers + 1}I", data, off)
    off += 4 * (layers + 1)
    dt = np.dtype("<f2") if precision == 16 else np.dtype("<f4")
    weights, biases = [], []
    for i in range(layers):
        n_in, n_out = widths[i], widths[i + 1]
        a = np.frombuffer(data, dtype=dt, count=n_in * n_out, offset=off).reshape(n_out, n_in)
        off += a.nbytes
        b = np.frombuffer(data, dtype=dt, count=n_out, offset=off)
        off += b.nbytes
        weights.append(a.T.astype(dt.newbyteorder("=")))
        biases.append(b.astype(dt.newbyteorder("=")))
    if off != len(data):
        raise ValueError(f"{path}: size mismatch")
    arch = NetworkArchitecture(widths[0], tuple(widths[1:-1]), widths[-1])
    return Network(arch, weights, biases)


def model_header_bytes(arch: NetworkArchitecture) -> int:
    return 8 + 4 * len(arch.widths)


def save_checkpoint(state: TrainState, path: str | Path) -> None:
    arrays = {}
    for i, p in enumerate(state.net.params()):
        arrays[f"param_{i}"] = p
    opt = state.optimizer.state()
    if opt.get("m") is not None:
        for i, (m, v) in enumerate(zip(opt["m"], opt["v"])):
            arrays[f"m_{i}"] = m
            arrays[f"v_{i}"] = v
    hist = np.array([[r.epoch, r.loss, r.overestimation_rate, r.beta, r.eta, r.avg_predicted_h]
                     for r in state.history], dtype=np.float64).reshape(-1, 6)
    sch = state.schedule
    meta = np.array([state.epoch, opt.get("t", 0), state.loss.beta, state.loss.eta,
                     sch.best_loss, sch.best_over, sch.stale], dtype=np.float64)
    with open(path, "wb") as fh:
        np.savez(fh, widths=np.array(state.net.arch.widths), history=hist, meta=meta,
                 phases=np.array(sch.phases, dtype=np.float64).reshape(-1, 3), **arrays)


def load_checkpoint(path: str | Path, cfg: TrainConfig) -> TrainState:
    with np.load(path) as z:
        widths = tuple(int(w) for w in z["widths"])
        arch = NetworkArchitecture(widths[0], widths[1:-1], widths[-1])
        n_layers = len(widths) - 1
        params = [z[f"param_{i}"] for i in range(2 * n_layers)]
        net = Network(arch, params[:n_layers], params[n_layers:])
        meta = z["meta"]
        opt = make_optimizer(cfg)
        if "m_0" in z:
            opt.load_state({"t": meta[1], "m": [z[f"m_{i}"] for i in range(2 * n_layers)],
                            "v": [z[f"v_{i}"] for i in range(2 * n_layers)]})
        history = [EpochRecord(int(r[0]), *(float(v) for v in r[1:])) for r in z["history"]]
        sched = Schedule(cfg.schedule_window, enabled=cfg.schedule_enabled,
                         best_loss=float(meta[4]), best_over=float(meta[5]), stale=int(meta[6]),
                         phases=[tuple(p) for p in z["phases"].tolist()])
    loss = replace(cfg.loss, beta=float(meta[2]), eta=float(meta[3]))
    return TrainState(net, opt, sched, loss, int(meta[0]), history)
