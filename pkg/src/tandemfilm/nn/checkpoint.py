"""Binary checkpoint container.

Layout: magic ``TNNCKPT1``, a length-prefixed JSON manifest (architecture,
hyperparameters, init scheme, freeze flags), the named parameter and state
arrays as little-endian float32 with shape headers, and a SHA-256 trailer
over everything before it.  Saving is byte-deterministic; loading verifies
magic and hash and rebuilds the network(s) from the manifest.
"""

import hashlib
import json
import struct

import numpy as np

from .layers import LAYER_KINDS
from .network import Network

MAGIC = b"TNNCKPT1"
FORMAT_VERSION = 1


class CheckpointError(ValueError):
    """Unreadable or corrupted checkpoint file."""


def _net_manifest(network: Network, name: str, meta: dict) -> dict:
    return {
        "name": name,
        "input_shape": list(network.input_shape),
        "output_dim": network.output_dim,
        "layers": network.manifest(),
        "frozen": [layer.frozen for layer in network.layers],
        **meta,
    }


def _collect_arrays(network: Network, name: str):
    for i, layer in enumerate(network.layers):
        for pname, value in layer.params.items():
            yield f"{name}/{i}/{pname}", value
        for sname, value in layer.state.items():
            yield f"{name}/{i}/{sname}", value


def _write(path, manifest: dict, arrays) -> None:
    blob = json.dumps(manifest, sort_keys=True, separators=(",", ":")).encode("utf-8")
    parts = [MAGIC, struct.pack("<Q", len(blob)), blob]
    arrays = list(arrays)
    parts.append(struct.pack("<I", len(arrays)))
    for name, value in arrays:
        encoded = name.encode("utf-8")
        parts.append(struct.pack("<H", len(encoded)))
        parts.append(encoded)
        parts.append(struct.pack("<B", value.ndim))
        for dim in value.shape:
            parts.append(struct.pack("<Q", dim))
        parts.append(np.ascontiguousarray(value, dtype="<f4").tobytes())
    payload = b"".join(parts)
    digest = hashlib.sha256(payload).digest()
    with open(path, "wb") as fh:
        fh.write(payload)
        fh.write(digest)


def save_network(path, network: Network, meta: dict | None = None) -> None:
    manifest = {
        "format": FORMAT_VERSION,
        "kind": "network",
        "networks": [_net_manifest(network, "net", meta or {})],
    }
    _write(path, manifest, _collect_arrays(network, "net"))


def save_tandem(path, tandem, meta: dict | None = None) -> None:
    """Store the inverse network and its frozen forward network together."""
    manifest = {
        "format": FORMAT_VERSION,
        "kind": "tandem",
        "networks": [
            _net_manifest(tandem.inn, "inn", dict(tandem.inn_meta)),
            _net_manifest(tandem.fnn, "fnn", dict(tandem.fnn_meta)),
        ],
        **(meta or {}),
    }
    arrays = list(_collect_arrays(tandem.inn, "inn")) + list(
        _collect_arrays(tandem.fnn, "fnn")
    )
    _write(path, manifest, arrays)


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def take(self, count: int) -> bytes:
        if self.pos + count > len(self.buf):
            raise CheckpointError("truncated checkpoint")
        out = self.buf[self.pos : self.pos + count]
        self.pos += count
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))[0]


def _rebuild(net_manifest: dict, arrays: dict) -> Network:
    layers = []
    for idx, entry in enumerate(net_manifest["layers"]):
        kwargs = {k: v for k, v in entry.items() if k != "kind"}
        try:
            layer = LAYER_KINDS[entry["kind"]](**kwargs)
        except KeyError:
            raise CheckpointError(f"unknown layer kind {entry['kind']!r}") from None
        prefix = f"{net_manifest['name']}/{idx}/"
        for pname in layer.params:
            layer.params[pname] = arrays[prefix + pname].astype(float)
        for sname in layer.state:
            layer.state[sname] = arrays[prefix + sname].astype(float)
        layer.frozen = bool(net_manifest["frozen"][idx])
        layers.append(layer)
    return Network(
        layers, tuple(net_manifest["input_shape"]), net_manifest["output_dim"]
    )


def load_checkpoint(path):
    """Returns (kind, {name: Network}, manifest dict)."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < len(MAGIC) + 32 or data[: len(MAGIC)] != MAGIC:
        raise CheckpointError("not a checkpoint file (bad magic)")
    payload, trailer = data[:-32], data[-32:]
    if hashlib.sha256(payload).digest() != trailer:
        raise CheckpointError("checkpoint content hash mismatch")
    reader = _Reader(payload)
    reader.take(len(MAGIC))
    manifest = json.loads(reader.take(reader.unpack("<Q")).decode("utf-8"))
    arrays = {}
    for _ in range(reader.unpack("<I")):
        name = reader.take(reader.unpack("<H")).decode("utf-8")
        ndim = reader.unpack("<B")
        shape = tuple(reader.unpack("<Q") for _ in range(ndim))
        count = int(np.prod(shape)) if shape else 1
        arrays[name] = np.frombuffer(reader.take(4 * count), dtype="<f4").reshape(shape)
    networks = {nm["name"]: _rebuild(nm, arrays) for nm in manifest["networks"]}
    return manifest["kind"], networks, manifest
