"""Two-stage training protocol, evaluation metrics, and inverse prediction.

Stage one fits a forward network on (normalized thicknesses -> spectrum).
Stage two composes a fresh inverse network with the frozen forward network
and minimizes the spectrum reconstruction error MSE(s, fnn(inn(s))); the
thickness labels never enter the tandem loss, which is what sidesteps the
one-to-many degeneracy of direct inverse regression.  Both stages keep the
weights of the best validation epoch.  Loss histories start with an epoch-0
entry evaluated before any update.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from . import dataset as ds
from . import tmm
from .models import TandemModel
from .nn import Adam, Network, mse, mse_grad
from .rng import CounterStream, tag

_TAG_SHUFFLE = tag("shuffle")


class NumericError(ArithmeticError):
    """Training produced a non-finite loss."""


@dataclass(frozen=True)
class TrainConfig:
    epochs: int
    batch_size: int = 16
    lr: float = 1e-4
    patience: int | None = None
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")

    def echo(self) -> dict:
        return {
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "learning_rate": self.lr,
            "patience": self.patience if self.patience is not None else "none",
            "seed": self.seed,
            "shuffle": self.shuffle,
        }


@dataclass
class TrainReport:
    train_losses: list = field(default_factory=list)  # index 0 = before training
    val_losses: list = field(default_factory=list)
    seconds: float = 0.0
    best_epoch: int = 0
    epochs_run: int = 0
    optimizer_steps: int = 0
    test_r2: float = float("nan")
    test_mse: float = float("nan")
    config: dict = field(default_factory=dict)


def _eval_loss(model, x, y, batch_size=256) -> float:
    """Full-pass MSE in eval mode (batch norm uses running stats)."""
    total = 0.0
    for start in range(0, len(x), batch_size):
        xb = x[start : start + batch_size]
        yb = y[start : start + batch_size]
        pred = model.forward(xb, train=False)
        total += np.sum((pred - yb) ** 2)
    return float(total / (len(x) * y.shape[1]))


def _trainable_net(model) -> Network:
    return model.inn if isinstance(model, TandemModel) else model


def _fit(model, x_train, y_train, x_val, y_val, config: TrainConfig) -> TrainReport:
    start_time = time.perf_counter()
    optimizer = Adam(_trainable_net(model), lr=config.lr)
    report = TrainReport(config=config.echo())

    report.train_losses.append(_eval_loss(model, x_train, y_train))
    report.val_losses.append(_eval_loss(model, x_val, y_val))
    best_val = report.val_losses[0]
    best_snap = _trainable_net(model).snapshot()
    report.best_epoch = 0

    n_train = len(x_train)
    order = np.arange(n_train)
    for epoch in range(1, config.epochs + 1):
        if config.shuffle:
            order = CounterStream(config.seed, _TAG_SHUFFLE, epoch).permutation(n_train)
        epoch_loss = 0.0
        for start in range(0, n_train, config.batch_size):
            batch = order[start : start + config.batch_size]
            xb, yb = x_train[batch], y_train[batch]
            pred = model.forward(xb, train=True)
            loss = mse(pred, yb)
            if not np.isfinite(loss):
                raise NumericError(f"non-finite training loss at epoch {epoch}")
            model.backward(mse_grad(pred, yb))
            optimizer.step()
            report.optimizer_steps += 1
            epoch_loss += loss * len(batch)
        report.train_losses.append(epoch_loss / n_train)
        val_loss = _eval_loss(model, x_val, y_val)
        report.val_losses.append(val_loss)
        report.epochs_run = epoch
        if val_loss < best_val:
            best_val = val_loss
            best_snap = _trainable_net(model).snapshot()
            report.best_epoch = epoch
        elif config.patience is not None and epoch - report.best_epoch >= config.patience:
            break

    _trainable_net(model).restore(best_snap)
    report.seconds = time.perf_counter() - start_time
    return report


def _split_xy(data: ds.Dataset, split: str, direction: str):
    idx = data.subset(split)
    thick = data.normalized()[idx]
    spec = data.spectra[idx]
    if direction == "forward":
        return thick, spec
    if direction == "inverse":
        return spec, thick
    return spec, spec  # tandem: spectrum in, spectrum out


def train_fnn(network: Network, data: ds.Dataset, config: TrainConfig):
    """Fit thicknesses -> spectrum; returns (network, report) with test metrics."""
    if network.input_dim != data.layer_count or network.output_dim != tmm.N_POINTS:
        raise ValueError(
            f"network is {network.input_dim}->{network.output_dim}, dataset needs "
            f"{data.layer_count}->{tmm.N_POINTS}"
        )
    report = _fit(network, *_split_xy(data, "train", "forward"),
                  *_split_xy(data, "val", "forward"), config)
    report.test_r2, report.test_mse = evaluate(network, data, "test")
    return network, report


def train_tandem(tandem: TandemModel, data: ds.Dataset, config: TrainConfig):
    """Fit the inverse half on spectrum reconstruction; the FNN must be frozen."""
    if not tandem.fnn.frozen:
        raise ValueError("tandem forward network must be frozen before training")
    if tandem.inn.input_dim != tmm.N_POINTS or tandem.layer_count != data.layer_count:
        raise ValueError(
            f"tandem maps {tandem.inn.input_dim}->{tandem.layer_count}, dataset needs "
            f"{tmm.N_POINTS}->{data.layer_count}"
        )
    report = _fit(tandem, *_split_xy(data, "train", "tandem"),
                  *_split_xy(data, "val", "tandem"), config)
    report.test_r2, report.test_mse = evaluate(tandem, data, "test")
    return tandem, report


def train_direct_inn(network: Network, data: ds.Dataset, config: TrainConfig):
    """Plain inverse regression on thickness labels (the one-to-many baseline)."""
    if network.input_dim != tmm.N_POINTS or network.output_dim != data.layer_count:
        raise ValueError(
            f"network is {network.input_dim}->{network.output_dim}, dataset needs "
            f"{tmm.N_POINTS}->{data.layer_count}"
        )
    report = _fit(network, *_split_xy(data, "train", "inverse"),
                  *_split_xy(data, "val", "inverse"), config)
    report.test_r2, report.test_mse = evaluate(network, data, "test")
    return network, report


def r2_score(pred: np.ndarray, target: np.ndarray) -> float:
    """1 - SS_res/SS_tot with SS_tot about the global mean of the targets."""
    pred = np.asarray(pred, dtype=float)
    target = np.asarray(target, dtype=float)
    ss_res = np.sum((target - pred) ** 2)
    ss_tot = np.sum((target - target.mean()) ** 2)
    if ss_tot == 0:
        return 1.0 if ss_res == 0 else float("-inf")
    return float(1.0 - ss_res / ss_tot)


def evaluate(model, data: ds.Dataset, split: str = "test"):
    """(R^2, MSE) over a split, pooling all samples and output points."""
    idx = data.subset(split)
    if len(idx) == 0:
        raise ValueError(f"empty split {split!r}")
    if isinstance(model, TandemModel):
        x, y = data.spectra[idx], data.spectra[idx]
    elif model.input_dim == data.layer_count:
        x, y = data.normalized()[idx], data.spectra[idx]
    else:
        x, y = data.spectra[idx], data.normalized()[idx]
    preds = np.vstack(
        [model.forward(x[s : s + 256], train=False) for s in range(0, len(x), 256)]
    )
    return r2_score(preds, y), mse(preds, y)


@dataclass(frozen=True)
class InverseDesign:
    thicknesses_nm: np.ndarray  # snapped to the 1 nm grid
    reconstructed: np.ndarray  # TMM spectrum of the snapped thicknesses
    design_mse: float


def predict_inverse(tandem: TandemModel, target, materials=None) -> InverseDesign:
    """Design thicknesses for a target spectrum and verify them with the TMM.

    The network's intermediate output is denormalized, snapped to the
    thickness grid, and re-simulated; the returned error is measured against
    that physical reconstruction, not the network's own belief.
    """
    target = np.asarray(target, dtype=float).reshape(-1)
    if target.size != tmm.N_POINTS:
        raise ValueError(f"target spectrum must have {tmm.N_POINTS} points")
    tandem.forward(target[None, :], train=False)
    thicknesses = ds.denormalize(tandem.last_mid[0], snap=True)
    reconstructed = tmm.transmission_spectrum(
        tmm.alternating_stack(thicknesses), materials=materials
    )
    return InverseDesign(thicknesses, reconstructed, mse(reconstructed, target))


# --- report files ---


def save_report(report: TrainReport, prefix) -> None:
    """``<prefix>_report.txt`` (human summary, includes wall time) plus
    ``<prefix>_losses.csv`` (deterministic; used for plotting)."""
    from pathlib import Path

    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    lines = ["[config]"]
    lines += [f"{k} = {v}" for k, v in report.config.items()]
    lines += [
        "",
        "[result]",
        f"epochs_run = {report.epochs_run}",
        f"best_epoch = {report.best_epoch}",
        f"optimizer_steps = {report.optimizer_steps}",
        f"test_r2 = {report.test_r2:.6f}",
        f"test_mse = {report.test_mse:.6e}",
        f"seconds = {report.seconds:.3f}",
    ]
    Path(f"{prefix}_report.txt").write_text("\n".join(lines) + "\n", newline="\n")
    rows = ["epoch,train_mse,val_mse"]
    for epoch, (tr, va) in enumerate(zip(report.train_losses, report.val_losses)):
        rows.append(f"{epoch},{tr:.9g},{va:.9g}")
    Path(f"{prefix}_losses.csv").write_text("\n".join(rows) + "\n", newline="\n")
