"""Binary model files.

Little-endian layout:

    magic "TCNK" (4 bytes)
    u32 format version (currently 1)
    config: u32 in_channels, blocks, layers_per_block, channels, kernel,
            out_dim, window_len; f64 dropout; u32 n_dilations; u32 * n
    norm:   f64 (mean, std) pair per input channel
    u32 tensor count, then per tensor in declaration order:
            u32 rank, u32 * rank dims, f64 payload
    u32 CRC32 of everything after the magic

Round trips are bit-exact; any flipped payload byte fails the checksum.
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np

from gaitkin.errors import (
    BadMagic,
    ChecksumMismatch,
    ShapeMismatch,
    TruncatedFile,
    VersionMismatch,
)
from gaitkin.tcn.config import TcnConfig
from gaitkin.tcn.model import NormStats, TcnModel

MAGIC = b"TCNK"
FORMAT_VERSION = 1


def save_model(model: TcnModel, path) -> None:
    cfg = model.config
    parts = [struct.pack("<I", FORMAT_VERSION)]
    parts.append(
        struct.pack(
            "<7I",
            cfg.in_channels,
            cfg.blocks,
            cfg.layers_per_block,
            cfg.channels,
            cfg.kernel,
            cfg.out_dim,
            cfg.window_len,
        )
    )
    parts.append(struct.pack("<d", cfg.dropout))
    parts.append(struct.pack("<I", len(cfg.dilation_per_block)))
    parts.append(struct.pack(f"<{len(cfg.dilation_per_block)}I", *cfg.dilation_per_block))
    pairs = np.column_stack([model.norm.mean, model.norm.std]).ravel()
    parts.append(pairs.astype("<f8").tobytes())
    parts.append(struct.pack("<I", len(model.weights)))
    for tensor in model.weights.values():
        parts.append(struct.pack("<I", tensor.ndim))
        parts.append(struct.pack(f"<{tensor.ndim}I", *tensor.shape))
        parts.append(np.ascontiguousarray(tensor).astype("<f8").tobytes())
    payload = b"".join(parts)
    crc = zlib.crc32(payload) & 0xFFFFFFFF
    Path(path).write_bytes(MAGIC + payload + struct.pack("<I", crc))


class _Reader:
    def __init__(self, data: bytes, offset: int):
        self.data = data
        self.offset = offset

    def take(self, n: int) -> bytes:
        if self.offset + n > len(self.data):
            raise TruncatedFile(
                f"needed {n} bytes at offset {self.offset}, file has {len(self.data)}"
            )
        out = self.data[self.offset : self.offset + n]
        self.offset += n
        return out

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def f64(self) -> float:
        return struct.unpack("<d", self.take(8))[0]

    def f64_array(self, count: int) -> np.ndarray:
        return np.frombuffer(self.take(8 * count), dtype="<f8").astype(np.float64)


def load_model(path) -> TcnModel:
    data = Path(path).read_bytes()
    if len(data) < 4 or data[:4] != MAGIC:
        raise BadMagic(f"{path}: not a model file")
    if len(data) < 12:
        raise TruncatedFile(f"{path}: too short for header and checksum")
    stored_crc = struct.unpack("<I", data[-4:])[0]
    actual_crc = zlib.crc32(data[4:-4]) & 0xFFFFFFFF
    if stored_crc != actual_crc:
        raise ChecksumMismatch(
            f"{path}: CRC32 {actual_crc:#010x} != stored {stored_crc:#010x}"
        )

    r = _Reader(data[:-4], 4)
    version = r.u32()
    if version != FORMAT_VERSION:
        raise VersionMismatch(version, FORMAT_VERSION)
    in_channels, blocks, layers_per_block, channels, kernel, out_dim, window_len = struct.unpack(
        "<7I", r.take(28)
    )
    dropout = r.f64()
    n_dil = r.u32()
    dilations = struct.unpack(f"<{n_dil}I", r.take(4 * n_dil))
    config = TcnConfig(
        in_channels=in_channels,
        blocks=blocks,
        layers_per_block=layers_per_block,
        channels=channels,
        kernel=kernel,
        dropout=dropout,
        dilation_per_block=tuple(dilations),
        out_dim=out_dim,
        window_len=window_len,
    )
    pairs = r.f64_array(2 * in_channels).reshape(in_channels, 2)
    norm = NormStats(mean=pairs[:, 0].copy(), std=pairs[:, 1].copy())

    n_tensors = r.u32()
    from gaitkin.tcn.model import weight_shapes

    expected = weight_shapes(config)
    if n_tensors != len(expected):
        raise ShapeMismatch(f"{path}: {n_tensors} tensors, config declares {len(expected)}")
    weights = {}
    for name, shape in expected.items():
        rank = r.u32()
        dims = struct.unpack(f"<{rank}I", r.take(4 * rank))
        if tuple(dims) != shape:
            raise ShapeMismatch(f"{path}: tensor {name} has dims {dims}, expected {shape}")
        weights[name] = r.f64_array(int(np.prod(dims))).reshape(dims)
    if r.offset != len(r.data):
        raise TruncatedFile(f"{path}: {len(r.data) - r.offset} unexpected trailing bytes")
    return TcnModel(config=config, weights=weights, norm=norm)
