"""Parameter containers, initialization, and checkpoint files.

A parameter set is an ordered dict of named float64 arrays.  Checkpoints are
a small binary format: an 8-byte magic, a format version, then one record
per array with its name, shape, and row-major little-endian float64 payload.
"""
from __future__ import annotations

import struct

import numpy as np

from ..core import DataFormatError

MAGIC = b"SSUMCKPT"
VERSION = 1


def uniform_init(shape, fan_in: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform(-a, a) with a = 1/sqrt(fan_in)."""
    a = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-a, a, size=shape)


def lstm_init(input_dim: int, hidden: int, rng: np.random.Generator, prefix: str) -> dict:
    """Stacked-gate LSTM parameters; weights fan-in scaled, biases zero."""
    return {
        prefix + ".W": uniform_init((4 * hidden, input_dim), input_dim, rng),
        prefix + ".U": uniform_init((4 * hidden, hidden), hidden, rng),
        prefix + ".b": np.zeros(4 * hidden),
    }


def dense_init(input_dim: int, rng: np.random.Generator, prefix: str) -> dict:
    """Single-neuron dense layer: weight vector plus scalar bias."""
    return {
        prefix + ".w": uniform_init((input_dim,), input_dim, rng),
        prefix + ".b": np.zeros(1),
    }


def vector_init(dim: int, rng: np.random.Generator, name: str) -> dict:
    return {name: uniform_init((dim,), dim, rng)}


def save_checkpoint(params: dict, path: str) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, len(params)))
        for name, arr in params.items():
            arr = np.ascontiguousarray(np.asarray(arr, dtype=np.float64))
            name_b = name.encode("utf-8")
            fh.write(struct.pack("<H", len(name_b)))
            fh.write(name_b)
            fh.write(struct.pack("<B", arr.ndim))
            for d in arr.shape:
                fh.write(struct.pack("<I", d))
            fh.write(arr.astype("<f8").tobytes(order="C"))


def load_checkpoint(path: str) -> dict:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[: len(MAGIC)] != MAGIC:
        raise DataFormatError("%r is not a checkpoint file (bad magic)" % path)
    off = len(MAGIC)
    version, count = struct.unpack_from("<II", data, off)
    off += 8
    if version != VERSION:
        raise DataFormatError("checkpoint version %d unsupported" % version)
    params: dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = struct.unpack_from("<H", data, off)
        off += 2
        name = data[off : off + name_len].decode("utf-8")
        off += name_len
        (ndim,) = struct.unpack_from("<B", data, off)
        off += 1
        shape = []
        for _ in range(ndim):
            (d,) = struct.unpack_from("<I", data, off)
            off += 4
            shape.append(d)
        n = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(data, dtype="<f8", count=n, offset=off).copy()
        off += n * 8
        params[name] = arr.reshape(shape)
    if off != len(data):
        raise DataFormatError("checkpoint has %d trailing bytes" % (len(data) - off))
    return params
