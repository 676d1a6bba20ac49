"""Sequential network container."""

import copy
import hashlib

import numpy as np


class Network:
    """Ordered layer chain with a fixed per-sample input shape.

    ``forward`` accepts flat (batch, features) input and reshapes it to
    ``input_shape`` (e.g. ``(401, 1)`` for sequence models), so producers
    never need to know how a particular architecture wants its input laid
    out.  ``backward`` returns the loss gradient w.r.t. that flat input.
    """

    def __init__(self, layers, input_shape, output_dim):
        self.layers = list(layers)
        self.input_shape = tuple(input_shape)
        self.output_dim = output_dim
        shape = self.input_shape
        for layer in self.layers:
            shape = layer.out_shape(shape)
        if shape != (output_dim,):
            raise ValueError(f"layers produce {shape}, declared output ({output_dim},)")

    @property
    def input_dim(self) -> int:
        return int(np.prod(self.input_shape))

    def forward(self, x, train=False):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x[None, :]
        out = x.reshape((x.shape[0],) + self.input_shape)
        for layer in self.layers:
            out = layer.forward(out, train=train)
        return out

    def backward(self, grad_out):
        grad = grad_out
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return grad.reshape(grad.shape[0], self.input_dim)

    # --- parameter bookkeeping ---

    def named_params(self):
        """Yields (layer_index, name, array) over trainable parameters."""
        for i, layer in enumerate(self.layers):
            for name, value in layer.params.items():
                yield i, name, value

    def param_count(self) -> int:
        return sum(v.size for _, _, v in self.named_params())

    def freeze(self):
        for layer in self.layers:
            layer.frozen = True
            layer.grads = {}
        return self

    @property
    def frozen(self) -> bool:
        return all(layer.frozen for layer in self.layers)

    def snapshot(self) -> dict:
        """Deep copy of parameters and layer state (for best-epoch restore)."""
        return {
            "params": [copy.deepcopy(layer.params) for layer in self.layers],
            "state": [copy.deepcopy(layer.state) for layer in self.layers],
        }

    def restore(self, snap: dict):
        for layer, params, state in zip(self.layers, snap["params"], snap["state"]):
            layer.params = copy.deepcopy(params)
            layer.state = copy.deepcopy(state)

    def params_digest(self) -> str:
        """SHA-256 over all trainable parameters as little-endian float32."""
        h = hashlib.sha256()
        for i, name, value in self.named_params():
            h.update(f"{i}/{name}".encode())
            h.update(value.astype("<f4").tobytes())
        return h.hexdigest()

    def manifest(self) -> list:
        """Structural description: one dict per layer (kind + hyperparameters)."""
        return [{"kind": layer.kind, **layer.hyper()} for layer in self.layers]
