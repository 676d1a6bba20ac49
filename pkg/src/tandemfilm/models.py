"""Builders for the forward/inverse network architectures and their tandem.

Forward networks (FNN) map the normalized thickness sequence to the 401-point
spectrum; inverse networks (INN) map a spectrum to normalized thicknesses.
Three algorithm families each:

- mlp  : dense 100-200-300-400-401 (FNN) / 800-400-200-100-L (INN)
- cnn  : Conv1D chains 10-20-40 kernel 3 (FNN) / 30-60-120 kernel 11 with
         batch norm after every conv (INN), max-pool 2 after each conv,
         then the dense head (100-200-300-400-401 / 2000-1000-500-100-L)
- lstm : stacked LSTM 20-100-200-401 (FNN) / 100-50-30-L (INN), scalar
         timesteps, last-step output

Hidden dense activations are LeakyReLU(0.01), conv activations ReLU, and
every output layer is a sigmoid, so normalized predictions live in [0, 1].
A tandem model is an INN feeding a parameter-frozen pre-trained FNN; only
the INN trains.
"""

from dataclasses import dataclass, field

from .nn import LSTM, Activation, BatchNorm1D, Conv1D, Dense, Flatten, MaxPool1D, Network
from .rng import CounterStream, tag

ALGORITHMS = ("mlp", "cnn", "lstm")

FNN_DENSE_WIDTHS = (100, 200, 300, 400, 401)
FNN_CONV_CHANNELS = (10, 20, 40)
FNN_CONV_KERNEL = 3
FNN_LSTM_HIDDEN = (20, 100, 200, 401)

INN_DENSE_WIDTHS = (800, 400, 200, 100)
INN_CONV_CHANNELS = (30, 60, 120)
INN_CONV_KERNEL = 11
INN_CONV_DENSE_WIDTHS = (2000, 1000, 500, 100)
INN_LSTM_HIDDEN = (100, 50, 30)

POOL_SIZE = 2

_TAG_INIT = tag("init")


def _streams(seed: int):
    index = 0
    while True:
        yield CounterStream(seed, _TAG_INIT, index)
        index += 1


def _dense_chain(widths, d_in, streams, out_activation="sigmoid"):
    layers = []
    for w in widths[:-1]:
        layers += [Dense(d_in, w, next(streams)), Activation("leaky_relu")]
        d_in = w
    layers += [Dense(d_in, widths[-1], next(streams)), Activation(out_activation)]
    return layers


def _conv_block(ch_in, ch_out, kernel, streams, batch_norm=False):
    layers = [
        Conv1D(
            ch_in, ch_out, kernel, stride=1, padding="same",
            bias=not batch_norm,  # batch norm's mean subtraction absorbs any bias
            stream=next(streams),
        )
    ]
    if batch_norm:
        layers.append(BatchNorm1D(ch_out))
    layers += [Activation("relu"), MaxPool1D(POOL_SIZE)]
    return layers


def _lstm_chain(hidden_sizes, d_in, final_width, streams):
    layers = []
    for h in hidden_sizes:
        layers.append(LSTM(d_in, h, return_sequences=True, stream=next(streams)))
        d_in = h
    layers.append(LSTM(d_in, final_width, return_sequences=False, stream=next(streams)))
    layers.append(Activation("sigmoid"))
    return layers


def build_fnn(algorithm: str, layer_count: int, seed: int = 0) -> Network:
    """Forward network: layer_count normalized thicknesses -> 401 spectrum."""
    algorithm = _check_algorithm(algorithm)
    streams = _streams(seed)
    if algorithm == "mlp":
        layers = _dense_chain(FNN_DENSE_WIDTHS, layer_count, streams)
        return Network(layers, (layer_count,), 401)
    if algorithm == "cnn":
        layers = []
        ch_in, length = 1, layer_count
        for ch_out in FNN_CONV_CHANNELS:
            layers += _conv_block(ch_in, ch_out, FNN_CONV_KERNEL, streams)
            ch_in, length = ch_out, length // POOL_SIZE
        if length < 1:
            raise ValueError(f"layer_count {layer_count} too small for the conv/pool chain")
        layers.append(Flatten())
        layers += _dense_chain(FNN_DENSE_WIDTHS, length * ch_in, streams)
        return Network(layers, (layer_count, 1), 401)
    layers = _lstm_chain(FNN_LSTM_HIDDEN[:-1], 1, FNN_LSTM_HIDDEN[-1], streams)
    return Network(layers, (layer_count, 1), 401)


def build_inn(algorithm: str, layer_count: int, seed: int = 0) -> Network:
    """Inverse network: 401 spectrum -> layer_count normalized thicknesses."""
    algorithm = _check_algorithm(algorithm)
    streams = _streams(seed)
    if algorithm == "mlp":
        layers = _dense_chain((*INN_DENSE_WIDTHS, layer_count), 401, streams)
        return Network(layers, (401,), layer_count)
    if algorithm == "cnn":
        layers = []
        ch_in, length = 1, 401
        for ch_out in INN_CONV_CHANNELS:
            layers += _conv_block(ch_in, ch_out, INN_CONV_KERNEL, streams, batch_norm=True)
            ch_in, length = ch_out, length // POOL_SIZE
        layers.append(Flatten())
        layers += _dense_chain((*INN_CONV_DENSE_WIDTHS, layer_count), length * ch_in, streams)
        return Network(layers, (401, 1), layer_count)
    layers = _lstm_chain(INN_LSTM_HIDDEN, 1, layer_count, streams)
    return Network(layers, (401, 1), layer_count)


def _check_algorithm(algorithm: str) -> str:
    algorithm = algorithm.lower()
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}")
    return algorithm


@dataclass
class TandemModel:
    """Inverse network feeding a frozen pre-trained forward network."""

    inn: Network
    fnn: Network
    inn_meta: dict = field(default_factory=dict)
    fnn_meta: dict = field(default_factory=dict)
    last_mid: object = None

    def forward(self, x, train=False):
        """Target spectrum -> reconstructed spectrum; keeps the intermediate
        normalized thicknesses in ``last_mid``."""
        mid = self.inn.forward(x, train=train)
        self.last_mid = mid
        return self.fnn.forward(mid, train=train)

    def backward(self, grad_out):
        # frozen FNN layers still propagate input gradients, just store none
        grad_mid = self.fnn.backward(grad_out)
        return self.inn.backward(grad_mid)

    @property
    def layer_count(self) -> int:
        return self.inn.output_dim


def compose_tandem(inn: Network, fnn: Network, inn_meta=None, fnn_meta=None) -> TandemModel:
    """Freeze the forward network and glue the two halves together."""
    if inn.output_dim != fnn.input_dim:
        raise ValueError(
            f"inverse output width {inn.output_dim} != forward input width {fnn.input_dim}"
        )
    fnn.freeze()
    return TandemModel(inn, fnn, dict(inn_meta or {}), dict(fnn_meta or {}))
