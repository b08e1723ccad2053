"""IqBuffer container and on-disk IQ / passband file formats.

IQ file layout (little-endian, 24-byte header, then float32 (I, Q) pairs):

    offset  size  field
    0       4     magic "UWIQ"
    4       2     version (u16, currently 1)
    6       1     sf (u8)
    7       1     kind (u8: 0 = linear, 1 = quadratic)
    8       2     os (u16)
    10      2     reserved (u16, zero)
    12      4     bw_hz (u32)
    16      8     sample count (u64)

Passband files are headerless little-endian float32 mono.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .chirp import CHIRP_KINDS, ChirpConfig

_MAGIC = b"UWIQ"
_HEADER = struct.Struct("<4sHBBHHIQ")
IQ_VERSION = 1


@dataclass(frozen=True)
class IqBuffer:
    """Complex baseband sample sequence plus its sample rate."""

    samples: np.ndarray
    sample_rate_hz: float

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.complex128)
        if not np.all(np.isfinite(s.view(np.float64))):
            raise ValueError("IqBuffer samples must be finite")
        object.__setattr__(self, "samples", s)

    def __len__(self):
        return len(self.samples)


def write_iq(path, buf: IqBuffer, cfg: ChirpConfig) -> None:
    samples = np.asarray(buf.samples, dtype=np.complex128)
    header = _HEADER.pack(
        _MAGIC,
        IQ_VERSION,
        cfg.sf,
        CHIRP_KINDS.index(cfg.kind),
        cfg.os,
        0,
        int(round(cfg.bw_hz)),
        len(samples),
    )
    inter = np.empty(2 * len(samples), dtype="<f4")
    inter[0::2] = samples.real
    inter[1::2] = samples.imag
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(inter.tobytes())


def read_iq(path) -> tuple[IqBuffer, ChirpConfig]:
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
        if len(raw) < _HEADER.size:
            raise ValueError(f"{path}: truncated IQ header ({len(raw)} bytes)")
        magic, version, sf, kind_idx, os_, _rsvd, bw, count = _HEADER.unpack(raw)
        if magic != _MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}, expected {_MAGIC!r}")
        if version != IQ_VERSION:
            raise ValueError(f"{path}: unsupported IQ version {version}")
        if kind_idx >= len(CHIRP_KINDS):
            raise ValueError(f"{path}: unknown chirp kind index {kind_idx}")
        data = np.frombuffer(fh.read(8 * count), dtype="<f4")
        if data.size != 2 * count:
            raise ValueError(
                f"{path}: expected {count} samples, file holds {data.size // 2}"
            )
    cfg = ChirpConfig(sf=sf, bw_hz=float(bw), os=os_, kind=CHIRP_KINDS[kind_idx])
    samples = data[0::2].astype(np.float64) + 1j * data[1::2].astype(np.float64)
    return IqBuffer(samples, cfg.sample_rate_hz), cfg


def write_passband(path, samples) -> None:
    np.asarray(samples, dtype="<f4").tofile(path)


def read_passband(path) -> np.ndarray:
    return np.fromfile(path, dtype="<f4").astype(np.float64)
