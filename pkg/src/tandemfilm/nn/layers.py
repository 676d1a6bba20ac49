"""Layer implementations: forward passes cache what backward needs.

Conventions: batch axis first; sequence tensors are (batch, steps, channels);
all math in float64.  ``backward`` consumes the gradient of the loss w.r.t.
the layer output, stores parameter gradients in ``self.grads`` (skipped
entirely when the layer is frozen), and returns the gradient w.r.t. the
input.  Weights are Glorot-uniform from a caller-supplied counter stream;
biases start at zero except the LSTM forget bias (+1).
"""

import numpy as np

from ..rng import CounterStream

LEAKY_SLOPE = 0.01


def _glorot(shape, fan_in, fan_out, stream: CounterStream) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return (stream.floats(shape) * 2.0 - 1.0) * limit


def _default_stream():
    return CounterStream(0, 0)


class Layer:
    kind = "layer"

    def __init__(self):
        self.params = {}
        self.grads = {}
        self.state = {}
        self.frozen = False
        self._cache = None

    def forward(self, x, train=False):
        raise NotImplementedError

    def backward(self, grad_out):
        raise NotImplementedError

    def hyper(self) -> dict:
        """Constructor arguments for the checkpoint manifest."""
        return {}

    def out_shape(self, in_shape: tuple) -> tuple:
        raise NotImplementedError

    def _store(self, **grads):
        if not self.frozen:
            self.grads = grads


class Dense(Layer):
    kind = "Dense"

    def __init__(self, d_in, d_out, stream=None):
        super().__init__()
        self.d_in, self.d_out = d_in, d_out
        stream = stream or _default_stream()
        self.params = {
            "W": _glorot((d_in, d_out), d_in, d_out, stream),
            "b": np.zeros(d_out),
        }

    def forward(self, x, train=False):
        self._cache = x
        return x @ self.params["W"] + self.params["b"]

    def backward(self, grad_out):
        x = self._cache
        self._store(W=x.T @ grad_out, b=grad_out.sum(axis=0))
        return grad_out @ self.params["W"].T

    def hyper(self):
        return {"d_in": self.d_in, "d_out": self.d_out}

    def out_shape(self, in_shape):
        assert in_shape == (self.d_in,), (in_shape, self.d_in)
        return (self.d_out,)


class Activation(Layer):
    kind = "Activation"

    NAMES = ("relu", "leaky_relu", "sigmoid", "tanh")

    def __init__(self, name, slope=LEAKY_SLOPE):
        super().__init__()
        if name not in self.NAMES:
            raise ValueError(f"unknown activation {name!r}")
        self.name = name
        self.slope = slope

    def forward(self, x, train=False):
        if self.name == "relu":
            y = np.maximum(x, 0.0)
            self._cache = x
        elif self.name == "leaky_relu":
            y = np.where(x > 0, x, self.slope * x)
            self._cache = x
        elif self.name == "sigmoid":
            y = _sigmoid(x)
            self._cache = y
        else:  # tanh
            y = np.tanh(x)
            self._cache = y
        return y

    def backward(self, grad_out):
        c = self._cache
        if self.name == "relu":
            return grad_out * (c > 0)
        if self.name == "leaky_relu":
            return grad_out * np.where(c > 0, 1.0, self.slope)
        if self.name == "sigmoid":
            return grad_out * c * (1.0 - c)
        return grad_out * (1.0 - c * c)

    def hyper(self):
        h = {"name": self.name}
        if self.name == "leaky_relu":
            h["slope"] = self.slope
        return h

    def out_shape(self, in_shape):
        return in_shape


class Flatten(Layer):
    kind = "Flatten"

    def forward(self, x, train=False):
        self._cache = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, grad_out):
        return grad_out.reshape(self._cache)

    def out_shape(self, in_shape):
        return (int(np.prod(in_shape)),)


class Conv1D(Layer):
    """Cross-correlation along the sequence axis (no kernel flip)."""

    kind = "Conv1D"

    def __init__(self, ch_in, ch_out, kernel, stride=1, padding="same", bias=True, stream=None):
        super().__init__()
        if padding not in ("same", "valid"):
            raise ValueError("padding must be 'same' or 'valid'")
        if padding == "same" and kernel % 2 == 0:
            raise ValueError("same padding requires an odd kernel size")
        if stride < 1:
            raise ValueError("stride must be >= 1")
        self.ch_in, self.ch_out = ch_in, ch_out
        self.kernel, self.stride, self.padding = kernel, stride, padding
        self.bias = bias
        stream = stream or _default_stream()
        fan_in = kernel * ch_in
        self.params = {"W": _glorot((kernel, ch_in, ch_out), fan_in, ch_out, stream)}
        if bias:
            # a bias feeding straight into batch norm is redundant (the mean
            # subtraction cancels it exactly), so those convs go bias-free
            self.params["b"] = np.zeros(ch_out)

    def _pad(self):
        return (self.kernel - 1) // 2 if self.padding == "same" else 0

    def forward(self, x, train=False):
        batch, length, _ = x.shape
        pad = self._pad()
        xp = np.pad(x, ((0, 0), (pad, pad), (0, 0))) if pad else x
        out_len = (length + 2 * pad - self.kernel) // self.stride + 1
        windows = np.lib.stride_tricks.sliding_window_view(xp, self.kernel, axis=1)
        windows = windows[:, :: self.stride][:, :out_len]  # (B, out, ch_in, k)
        cols = windows.transpose(0, 1, 3, 2).reshape(batch * out_len, -1)
        w_flat = self.params["W"].reshape(self.kernel * self.ch_in, self.ch_out)
        y = cols @ w_flat
        if self.bias:
            y += self.params["b"]
        self._cache = (cols, x.shape, out_len)
        return y.reshape(batch, out_len, self.ch_out)

    def backward(self, grad_out):
        cols, x_shape, out_len = self._cache
        batch, length, _ = x_shape
        pad = self._pad()
        g = grad_out.reshape(batch * out_len, self.ch_out)
        grads = {"W": (cols.T @ g).reshape(self.kernel, self.ch_in, self.ch_out)}
        if self.bias:
            grads["b"] = g.sum(axis=0)
        self._store(**grads)
        dxp = np.zeros((batch, length + 2 * pad, self.ch_in))
        w = self.params["W"]
        for offset in range(self.kernel):
            # every output position l reads padded input at l*stride + offset
            dxp[:, offset : offset + out_len * self.stride : self.stride] += (
                grad_out @ w[offset].T
            )
        return dxp[:, pad : pad + length] if pad else dxp

    def hyper(self):
        return {
            "ch_in": self.ch_in,
            "ch_out": self.ch_out,
            "kernel": self.kernel,
            "stride": self.stride,
            "padding": self.padding,
            "bias": self.bias,
        }

    def out_shape(self, in_shape):
        length, ch = in_shape
        assert ch == self.ch_in
        pad = 2 * self._pad()
        return ((length + pad - self.kernel) // self.stride + 1, self.ch_out)


class MaxPool1D(Layer):
    """Non-overlapping max pooling; trailing remainder dropped.

    Gradient routes to the first maximal element of each window (argmax tie
    rule), so constant inputs still have a well-defined backward pass.
    """

    kind = "MaxPool1D"

    def __init__(self, size):
        super().__init__()
        if size < 1:
            raise ValueError("pool size must be >= 1")
        self.size = size

    def forward(self, x, train=False):
        batch, length, ch = x.shape
        out_len = length // self.size
        windows = x[:, : out_len * self.size].reshape(batch, out_len, self.size, ch)
        arg = windows.argmax(axis=2)
        self._cache = (x.shape, arg)
        return np.take_along_axis(windows, arg[:, :, None, :], axis=2)[:, :, 0, :]

    def backward(self, grad_out):
        x_shape, arg = self._cache
        batch, length, ch = x_shape
        out_len = arg.shape[1]
        dwin = np.zeros((batch, out_len, self.size, ch))
        np.put_along_axis(dwin, arg[:, :, None, :], grad_out[:, :, None, :], axis=2)
        dx = np.zeros(x_shape)
        dx[:, : out_len * self.size] = dwin.reshape(batch, out_len * self.size, ch)
        return dx

    def hyper(self):
        return {"size": self.size}

    def out_shape(self, in_shape):
        length, ch = in_shape
        return (length // self.size, ch)


class BatchNorm1D(Layer):
    """Per-channel normalization over all non-channel axes of the batch."""

    kind = "BatchNorm1D"

    def __init__(self, ch, momentum=0.9, eps=1e-5):
        super().__init__()
        self.ch, self.momentum, self.eps = ch, momentum, eps
        self.params = {"gamma": np.ones(ch), "beta": np.zeros(ch)}
        self.state = {"running_mean": np.zeros(ch), "running_var": np.ones(ch)}

    def forward(self, x, train=False):
        if train:
            if x.shape[0] < 2:
                raise ValueError("batch normalization needs batch size >= 2 in train mode")
            axes = tuple(range(x.ndim - 1))
            mean = x.mean(axis=axes)
            var = x.var(axis=axes)
            m = self.momentum
            self.state["running_mean"] = m * self.state["running_mean"] + (1 - m) * mean
            self.state["running_var"] = m * self.state["running_var"] + (1 - m) * var
        else:
            mean = self.state["running_mean"]
            var = self.state["running_var"]
        inv_std = 1.0 / np.sqrt(var + self.eps)
        x_hat = (x - mean) * inv_std
        self._cache = (x_hat, inv_std, train)
        return self.params["gamma"] * x_hat + self.params["beta"]

    def backward(self, grad_out):
        x_hat, inv_std, train = self._cache
        axes = tuple(range(grad_out.ndim - 1))
        self._store(
            gamma=(grad_out * x_hat).sum(axis=axes),
            beta=grad_out.sum(axis=axes),
        )
        dxhat = grad_out * self.params["gamma"]
        if not train:
            return dxhat * inv_std
        n = np.prod([grad_out.shape[a] for a in axes])
        return (
            inv_std
            / n
            * (n * dxhat - dxhat.sum(axis=axes) - x_hat * (dxhat * x_hat).sum(axis=axes))
        )

    def hyper(self):
        return {"ch": self.ch, "momentum": self.momentum, "eps": self.eps}

    def out_shape(self, in_shape):
        return in_shape


class LSTM(Layer):
    """Single LSTM layer over (batch, steps, features).

    Gates follow the standard formulation: for z_t = [h_{t-1}, x_t],
    f = sigmoid(z W_f + b_f), i = sigmoid(z W_i + b_i), g = tanh(z W_g + b_g),
    c_t = f*c_{t-1} + i*g, o = sigmoid(z W_o + b_o), h_t = o*tanh(c_t).
    Returns the full hidden sequence, or only the last h when
    ``return_sequences`` is false.
    """

    kind = "LSTM"

    GATES = ("f", "i", "g", "o")

    def __init__(self, d_in, hidden, return_sequences=True, stream=None):
        super().__init__()
        self.d_in, self.hidden = d_in, hidden
        self.return_sequences = return_sequences
        stream = stream or _default_stream()
        concat = hidden + d_in
        self.params = {}
        for gate in self.GATES:
            self.params[f"W_{gate}"] = _glorot((concat, hidden), concat, hidden, stream)
            self.params[f"b_{gate}"] = np.zeros(hidden)
        self.params["b_f"] = np.ones(hidden)  # open forget gate at init

    def step(self, x_t, h_prev, c_prev):
        """One timestep; returns (h, c) plus the gate values for backward."""
        z = np.concatenate([h_prev, x_t], axis=1)
        p = self.params
        f = _sigmoid(z @ p["W_f"] + p["b_f"])
        i = _sigmoid(z @ p["W_i"] + p["b_i"])
        g = np.tanh(z @ p["W_g"] + p["b_g"])
        o = _sigmoid(z @ p["W_o"] + p["b_o"])
        c = f * c_prev + i * g
        h = o * np.tanh(c)
        return h, c, (z, f, i, g, o, c_prev, c)

    def forward(self, x, train=False):
        batch, steps, _ = x.shape
        h = np.zeros((batch, self.hidden))
        c = np.zeros((batch, self.hidden))
        caches = []
        hs = np.empty((batch, steps, self.hidden))
        for t in range(steps):
            h, c, cache = self.step(x[:, t], h, c)
            hs[:, t] = h
            caches.append(cache)
        self._cache = (caches, x.shape)
        return hs if self.return_sequences else h

    def backward(self, grad_out):
        caches, x_shape = self._cache
        batch, steps, _ = x_shape
        p = self.params
        dW = {f"W_{g}": np.zeros_like(p[f"W_{g}"]) for g in self.GATES}
        db = {f"b_{g}": np.zeros_like(p[f"b_{g}"]) for g in self.GATES}
        dx = np.empty(x_shape)
        dh_next = np.zeros((batch, self.hidden))
        dc_next = np.zeros((batch, self.hidden))
        for t in range(steps - 1, -1, -1):
            z, f, i, g, o, c_prev, c = caches[t]
            if self.return_sequences:
                dh = grad_out[:, t] + dh_next
            else:
                dh = (grad_out if t == steps - 1 else 0.0) + dh_next
            tc = np.tanh(c)
            do = dh * tc
            dc = dh * o * (1.0 - tc * tc) + dc_next
            df = dc * c_prev
            di = dc * g
            dg = dc * i
            dc_next = dc * f
            da = {
                "f": df * f * (1.0 - f),
                "i": di * i * (1.0 - i),
                "g": dg * (1.0 - g * g),
                "o": do * o * (1.0 - o),
            }
            dz = np.zeros_like(z)
            for gate in self.GATES:
                dW[f"W_{gate}"] += z.T @ da[gate]
                db[f"b_{gate}"] += da[gate].sum(axis=0)
                dz += da[gate] @ p[f"W_{gate}"].T
            dh_next = dz[:, : self.hidden]
            dx[:, t] = dz[:, self.hidden :]
        self._store(**dW, **db)
        return dx

    def hyper(self):
        return {
            "d_in": self.d_in,
            "hidden": self.hidden,
            "return_sequences": self.return_sequences,
        }

    def out_shape(self, in_shape):
        steps, ch = in_shape
        assert ch == self.d_in
        return (steps, self.hidden) if self.return_sequences else (self.hidden,)


def _sigmoid(x):
    # clip keeps exp() in range; sigmoid is fully saturated far before +-500
    return 1.0 / (1.0 + np.exp(-np.clip(x, -500.0, 500.0)))


LAYER_KINDS = {
    cls.kind: cls
    for cls in (Dense, Activation, Flatten, Conv1D, MaxPool1D, BatchNorm1D, LSTM)
}
