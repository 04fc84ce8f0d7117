"""Graph-attention parameter container, initialization, and persistence."""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

import numpy as np

from ..errors import DataError

STEPS = (1, 2, 3, 4)  # word->sent, chord->sent, sent->word, sent->chord


@dataclass(frozen=True)
class GatDims:
    d_sent: int
    d_word: int
    d_chord: int
    d_hidden: int = 128
    heads: int = 4
    d_ffn: int = 512
    d_edge: int = 16
    leaky_slope: float = 0.2

    def __post_init__(self):
        if self.d_hidden % self.heads != 0:
            raise DataError(
                f"hidden width {self.d_hidden} not divisible by {self.heads} heads"
            )

    @property
    def d_head(self) -> int:
        return self.d_hidden // self.heads


def _tensor_shapes(dims: GatDims) -> list[tuple[str, tuple[int, int]]]:
    d_h, d_e = dims.d_hidden, dims.d_edge
    shapes = [
        ("adapt_sent_w", (d_h, dims.d_sent)),
        ("adapt_sent_b", (1, d_h)),
        ("adapt_word_w", (d_h, dims.d_word)),
        ("adapt_word_b", (1, d_h)),
        ("adapt_chord_w", (d_h, dims.d_chord)),
        ("adapt_chord_b", (1, d_h)),
    ]
    for s in STEPS:
        shapes += [
            (f"step{s}_wq", (d_h, d_h)),
            (f"step{s}_wk", (d_h, d_h)),
            (f"step{s}_wv", (d_h, d_h)),
            (f"step{s}_wa", (dims.heads, 2 * dims.d_head + d_e)),
            (f"step{s}_we", (1, d_e)),
            (f"step{s}_be", (1, d_e)),
            (f"step{s}_ffn_w1", (dims.d_ffn, d_h)),
            (f"step{s}_ffn_b1", (1, dims.d_ffn)),
            (f"step{s}_ffn_w2", (d_h, dims.d_ffn)),
            (f"step{s}_ffn_b2", (1, d_h)),
        ]
    shapes.append(("score_bilinear", (d_h, d_h)))
    return shapes


@dataclass
class GatParams:
    dims: GatDims
    tensors: dict[str, np.ndarray]
    frozen: bool = False

    @classmethod
    def init(cls, dims: GatDims, seed: int) -> "GatParams":
        rng = np.random.default_rng(seed)
        tensors = {}
        for name, shape in _tensor_shapes(dims):
            if name.endswith("_b") or name.endswith("_b1") or name.endswith("_b2") \
                    or name.endswith("_be"):
                tensors[name] = np.zeros(shape)
            elif name == "score_bilinear":
                tensors[name] = 1e-3 * rng.standard_normal(shape)
            else:
                bound = np.sqrt(6.0 / (shape[0] + shape[1]))
                tensors[name] = rng.uniform(-bound, bound, shape)
        return cls(dims=dims, tensors=tensors)

    def freeze(self) -> "GatParams":
        """Mark read-only; mutation attempts raise and trainers refuse it."""
        for arr in self.tensors.values():
            arr.setflags(write=False)
        self.frozen = True
        return self

    def thaw(self) -> "GatParams":
        """Deep writable copy for joint-training ablations."""
        return GatParams(
            dims=self.dims,
            tensors={k: v.copy() for k, v in self.tensors.items()},
            frozen=False,
        )


def params_hash(params: GatParams) -> str:
    h = hashlib.blake2s()
    for name in sorted(params.tensors):
        arr = params.tensors[name]
        h.update(name.encode())
        h.update(str(arr.shape).encode())
        h.update(np.ascontiguousarray(arr).tobytes())
    return h.hexdigest()


_MAGIC = b"HGAT1"


def save_params(path, params: GatParams) -> None:
    """Sectioned binary: magic, a fixed dimensions header, tensor count,
    then per tensor the name, rows, cols, and row-major little-endian
    float32 payload.
    """
    d = params.dims
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<7Id", d.d_sent, d.d_word, d.d_chord,
                             d.d_hidden, d.heads, d.d_ffn, d.d_edge,
                             d.leaky_slope))
        fh.write(struct.pack("<I", len(params.tensors)))
        for name in sorted(params.tensors):
            arr = np.atleast_2d(params.tensors[name])
            raw = name.encode()
            fh.write(struct.pack("<H", len(raw)))
            fh.write(raw)
            fh.write(struct.pack("<II", arr.shape[0], arr.shape[1]))
            fh.write(arr.astype("<f4").tobytes(order="C"))


def load_params(path) -> GatParams:
    with open(path, "rb") as fh:
        if fh.read(len(_MAGIC)) != _MAGIC:
            raise DataError(f"{path}: not a {_MAGIC.decode()} parameter file")
        header = fh.read(struct.calcsize("<7Id"))
        d_sent, d_word, d_chord, d_hidden, heads, d_ffn, d_edge, leaky = \
            struct.unpack("<7Id", header)
        dims = GatDims(d_sent=d_sent, d_word=d_word, d_chord=d_chord,
                       d_hidden=d_hidden, heads=heads, d_ffn=d_ffn,
                       d_edge=d_edge, leaky_slope=leaky)
        (count,) = struct.unpack("<I", fh.read(4))
        entries = {}
        for _ in range(count):
            (name_len,) = struct.unpack("<H", fh.read(2))
            name = fh.read(name_len).decode()
            rows, cols = struct.unpack("<II", fh.read(8))
            data = np.frombuffer(fh.read(rows * cols * 4), dtype="<f4")
            if data.size != rows * cols:
                raise DataError(f"{path}: truncated tensor {name}")
            entries[name] = data.reshape(rows, cols).astype(np.float64)
    expected = {name for name, _ in _tensor_shapes(dims)}
    if set(entries) != expected:
        raise DataError(f"{path}: tensor set does not match dimensions")
    return GatParams(dims=dims, tensors=entries)
