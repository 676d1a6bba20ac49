"""Finite-difference verification of the backward passes."""

import numpy as np

from ..rng import CounterStream, tag
from .losses import mse, mse_grad


def _branch_signature(network):
    """Active relu/pool branches of the last forward pass.

    Central differences are only a derivative oracle where the loss is smooth
    between theta-eps and theta+eps; if a perturbation flips a relu sign or a
    max-pool argmax, the two evaluations sit on different linear pieces and
    the comparison is meaningless, so such coordinates are skipped.
    """
    parts = []
    for layer in network.layers:
        if layer.kind == "Activation" and layer.name in ("relu", "leaky_relu"):
            parts.append(layer._cache > 0)
        elif layer.kind == "MaxPool1D":
            parts.append(layer._cache[1].copy())
    return parts


def _same_branches(a, b) -> bool:
    return all(np.array_equal(x, y) for x, y in zip(a, b))


def gradient_check(
    network,
    x,
    target,
    epsilon: float = 1e-5,
    max_coords_per_param: int = 64,
    seed: int = 0,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    Perturbs up to ``max_coords_per_param`` coordinates per parameter tensor
    (all of them when the tensor is small), computing
    (f(p+eps) - f(p-eps)) / 2 eps against the stored analytic gradient.
    Relative error is |a - n| / max(|a|, |n|, 1e-12).  Runs in train mode so
    batch statistics enter the check; coordinates whose perturbation crosses
    a relu/max-pool kink are excluded (no derivative exists to compare
    against there).  The running-stat side effect of the extra forward passes
    does not influence any train-mode loss value.
    """
    pred = network.forward(x, train=True)
    loss0 = mse(pred, target)
    assert np.isfinite(loss0)
    network.backward(mse_grad(pred, target))
    analytic = {
        (i, name): layer.grads[name].copy()
        for i, layer in enumerate(network.layers)
        if not layer.frozen
        for name in layer.grads
    }

    stream = CounterStream(seed, tag("gradchk"))
    worst = 0.0
    for i, layer in enumerate(network.layers):
        if layer.frozen:
            continue
        for name, param in layer.params.items():
            flat = param.reshape(-1)
            if flat.size <= max_coords_per_param:
                coords = np.arange(flat.size)
            else:
                coords = stream.integers(flat.size, (max_coords_per_param,))
            for c in np.unique(coords):
                original = flat[c]
                flat[c] = original + epsilon
                loss_plus = mse(network.forward(x, train=True), target)
                sig_plus = _branch_signature(network)
                flat[c] = original - epsilon
                loss_minus = mse(network.forward(x, train=True), target)
                sig_minus = _branch_signature(network)
                flat[c] = original
                if not _same_branches(sig_plus, sig_minus):
                    continue
                numeric = (loss_plus - loss_minus) / (2.0 * epsilon)
                a = analytic[i, name].reshape(-1)[c]
                rel = abs(a - numeric) / max(abs(a), abs(numeric), 1e-12)
                worst = max(worst, rel)
    # leave the cached activations consistent with the unperturbed params
    network.forward(x, train=True)
    return worst
