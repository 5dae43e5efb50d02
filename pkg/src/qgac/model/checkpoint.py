"""Versioned binary checkpoint container.

Layout (all integers little-endian)::

    8 bytes   magic b"QGACCKPT"
    u32       format version
    u64       index length L
    L bytes   UTF-8 JSON index
    ...       raw tensor data, each tensor at index offset (relative to here)

The index holds ``config``, ``stage``, ``stats`` and a ``tensors`` list of
``{name, dtype, shape, offset, nbytes}`` records.
"""

from __future__ import annotations

import io
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..coeffs import NormalizationStats
from .networks import NetworkConfig, QGACNet

MAGIC = b"QGACCKPT"
FORMAT_VERSION = 1
SUPPORTED_VERSIONS = (1,)
STAGES = ("regression", "gan")
PREFIXES = ("blocknet_pre", "frequencynet", "blocknet_post", "fusion", "color_net")


class CheckpointError(ValueError):
    pass


@dataclass
class ModelCheckpoint:
    config: NetworkConfig
    params: dict[str, np.ndarray]
    stats: NormalizationStats
    stage: str = "regression"
    version: int = FORMAT_VERSION
    _net: QGACNet | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.stage not in STAGES:
            raise CheckpointError(f"unknown training stage {self.stage!r}")

    @classmethod
    def from_net(cls, net: QGACNet, stats: NormalizationStats, stage: str = "regression") -> ModelCheckpoint:
        return cls(net.config, net.state_dict(), stats, stage)

    def build(self, dtype=np.float32) -> QGACNet:
        """Network holding these parameters; cached per dtype."""
        if self._net is not None and self._net.parameters()[0].dtype == dtype:
            return self._net
        check_architecture(self.config, self.params)
        net = QGACNet(self.config)
        net.load_state_dict(self.params)
        net.astype(dtype)
        self._net = net
        return net


def architecture_table(config: NetworkConfig) -> dict[str, tuple[int, ...]]:
    """Parameter name -> shape for a configuration."""
    return {name: p.shape for name, p in QGACNet(config).named_parameters()}


def check_architecture(config: NetworkConfig, params: dict[str, np.ndarray]):
    table = architecture_table(config)
    missing = sorted(set(table) - set(params))
    extra = sorted(set(params) - set(table))
    if missing or extra:
        raise CheckpointError(f"parameter names do not match the architecture: missing {missing[:3]}, extra {extra[:3]}")
    for name, shape in table.items():
        if tuple(params[name].shape) != tuple(shape):
            raise CheckpointError(f"{name}: shape {params[name].shape} does not match architecture {shape}")


def save_checkpoint(ckpt: ModelCheckpoint, sink) -> None:
    """Write to a path or a binary file object."""
    records = []
    blobs = []
    offset = 0
    for name in sorted(ckpt.params):
        arr = np.ascontiguousarray(ckpt.params[name])
        dt = arr.dtype.newbyteorder("<")
        raw = arr.astype(dt, copy=False).tobytes()
        records.append({"name": name, "dtype": dt.str, "shape": list(arr.shape), "offset": offset, "nbytes": len(raw)})
        blobs.append(raw)
        offset += len(raw)
    index = {
        "config": ckpt.config.to_dict(),
        "stage": ckpt.stage,
        "stats": ckpt.stats.to_dict(),
        "tensors": records,
    }
    head = json.dumps(index, sort_keys=True).encode("utf-8")
    payload = MAGIC + struct.pack("<IQ", ckpt.version, len(head)) + head + b"".join(blobs)
    if isinstance(sink, (str, Path)):
        Path(sink).write_bytes(payload)
    else:
        sink.write(payload)


def load_checkpoint(source) -> ModelCheckpoint:
    if isinstance(source, (str, Path)):
        data = Path(source).read_bytes()
    elif isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    else:
        data = source.read()
    if len(data) < 20 or data[:8] != MAGIC:
        raise CheckpointError("not a checkpoint file (bad magic or truncated header)")
    version, head_len = struct.unpack("<IQ", data[8:20])
    if version not in SUPPORTED_VERSIONS:
        raise CheckpointError(f"checkpoint format version {version} unsupported; supported: {SUPPORTED_VERSIONS}")
    if 20 + head_len > len(data):
        raise CheckpointError("checkpoint truncated inside the index")
    try:
        index = json.loads(data[20 : 20 + head_len].decode("utf-8"))
        config = NetworkConfig.from_dict(index["config"])
        stats = NormalizationStats.from_dict(index["stats"])
        stage = index["stage"]
        records = index["tensors"]
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"corrupt checkpoint index: {exc}") from exc
    body = memoryview(data)[20 + head_len :]
    params = {}
    for rec in records:
        start, n = rec["offset"], rec["nbytes"]
        if start + n > len(body):
            raise CheckpointError(f"checkpoint truncated inside tensor {rec['name']!r}")
        arr = np.frombuffer(body[start : start + n], dtype=np.dtype(rec["dtype"]))
        if arr.size != int(np.prod(rec["shape"])):
            raise CheckpointError(f"tensor {rec['name']!r} size does not match its shape")
        params[rec["name"]] = arr.reshape(rec["shape"]).copy()
    check_architecture(config, params)
    return ModelCheckpoint(config, params, stats, stage, version)


def checkpoint_bytes(ckpt: ModelCheckpoint) -> bytes:
    buf = io.BytesIO()
    save_checkpoint(ckpt, buf)
    return buf.getvalue()


def interpolate_params(a: ModelCheckpoint, b: ModelCheckpoint, alpha: float) -> ModelCheckpoint:
    """Per-parameter (1 - alpha) * a + alpha * b."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    if a.config != b.config or set(a.params) != set(b.params):
        raise CheckpointError("checkpoints have different architectures")
    for name in a.params:
        if a.params[name].shape != b.params[name].shape:
            raise CheckpointError(f"{name}: shapes differ {a.params[name].shape} vs {b.params[name].shape}")
    if a.stats.to_dict() != b.stats.to_dict():
        raise CheckpointError("checkpoints carry different normalization statistics")
    if alpha == 0.0:
        params = {n: v.copy() for n, v in a.params.items()}
    elif alpha == 1.0:
        params = {n: b.params[n].astype(a.params[n].dtype) for n in a.params}
    else:
        # a + alpha * (b - a) keeps interp(a, a, alpha) == a exactly
        params = {n: (a.params[n] + alpha * (b.params[n] - a.params[n])).astype(a.params[n].dtype) for n in a.params}
    return ModelCheckpoint(a.config, params, a.stats, b.stage if alpha == 1.0 else a.stage)
