"""Baseband chirp synthesis: linear and quadratic sweeps, symbol
modulation by frequency shift with in-band folding, and frame assembly.

All waveforms are built by phase accumulation over the instantaneous
frequency evaluated at mid-sample instants. The frequency fold (wrap back
to the bottom of the band once the sweep passes +BW/2) is quantized to
the non-oversampled symbol-sample grid: this keeps every decimated sample
of a modulated symbol exactly equal to the base chirp times the cyclic
tone exp(j*2*pi*s*k/N), for any oversampling factor, which is what makes
noiseless dechirp demodulation exact. A band-edge-exact fold would leave
a residual phase offset of 2*pi*BW*t_fold (irrational for the quadratic
sweep) across the fold and break that exactness at os > 1; the price paid
here is a frequency excursion of at most 2*BW/N for fewer than os samples
around the fold.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

LINEAR = "linear"
QUADRATIC = "quadratic"
CHIRP_KINDS = (LINEAR, QUADRATIC)


@dataclass(frozen=True)
class ChirpConfig:
    """Waveform parameters shared by every symbol of a link."""

    sf: int = 8            # spreading factor, N = 2**sf bins
    bw_hz: float = 6000.0  # swept bandwidth
    os: int = 2            # oversampling factor (samples per bin)
    kind: str = QUADRATIC  # payload chirp family
    carrier_hz: float = 25000.0  # used only by passband conversion

    def __post_init__(self):
        if not 6 <= self.sf <= 10:
            raise ValueError(f"sf must be in [6, 10], got {self.sf}")
        if self.kind not in CHIRP_KINDS:
            raise ValueError(f"kind must be one of {CHIRP_KINDS}, got {self.kind!r}")
        if self.os < 1 or int(self.os) != self.os:
            raise ValueError(f"os must be a positive integer, got {self.os}")
        if self.bw_hz <= 0:
            raise ValueError("bw_hz must be positive")

    @property
    def n_bins(self) -> int:
        return 1 << self.sf

    @property
    def symbol_period_s(self) -> float:
        return self.n_bins / self.bw_hz

    @property
    def sample_rate_hz(self) -> float:
        return self.bw_hz * self.os

    @property
    def samples_per_symbol(self) -> int:
        return self.n_bins * self.os


@dataclass(frozen=True)
class FrameLayout:
    """Frame structure: linear preamble/SFD followed by payload symbols."""

    n_preamble: int = 8
    n_sfd: int = 2
    n_payload: int = 0

    def __post_init__(self):
        if self.n_preamble < 2:
            raise ValueError("need at least 2 preamble symbols")
        if self.n_sfd < 0 or self.n_payload < 0:
            raise ValueError("negative symbol counts")

    @property
    def n_symbols(self) -> int:
        return self.n_preamble + self.n_sfd + self.n_payload

    def frame_samples(self, cfg: ChirpConfig) -> int:
        return self.n_symbols * cfg.samples_per_symbol

    def payload_offset(self, cfg: ChirpConfig) -> int:
        return (self.n_preamble + self.n_sfd) * cfg.samples_per_symbol


def _wrapped_freq(cfg: ChirpConfig, kind: str, shift_hz: float) -> np.ndarray:
    """Instantaneous frequency at mid-sample instants, folded into band.

    The fold decision is made once per non-oversampled symbol sample
    (block of os samples) so the subtracted phase telescopes to an exact
    multiple of 2*pi on the decimation grid.
    """
    n = cfg.n_bins
    m = cfg.samples_per_symbol
    bw = cfg.bw_hz
    t_mid = (np.arange(m) + 0.5) / cfg.sample_rate_hz
    u = t_mid / cfg.symbol_period_s
    if kind == LINEAR:
        f = bw * u - bw / 2.0
    else:
        f = bw * u * u - bw / 2.0
    f = f + shift_hz
    blocks = f.reshape(n, cfg.os)
    wraps = np.floor((blocks[:, :1] + bw / 2.0) / bw)
    return (blocks - bw * wraps).reshape(-1)


def _accumulate(cfg: ChirpConfig, freq: np.ndarray) -> np.ndarray:
    phase = 2.0 * np.pi * np.cumsum(freq) / cfg.sample_rate_hz
    phase = np.concatenate(([0.0], phase[:-1]))
    return np.exp(1j * phase)


@lru_cache(maxsize=64)
def _base_chirp_cached(sf, bw_hz, os, kind):
    cfg = ChirpConfig(sf=sf, bw_hz=bw_hz, os=os, kind=kind)
    return _accumulate(cfg, _wrapped_freq(cfg, kind, 0.0))


def base_chirp(cfg: ChirpConfig, direction: str = "up") -> np.ndarray:
    """One base symbol (shift 0). The downchirp is the conjugate upchirp."""
    if direction not in ("up", "down"):
        raise ValueError(f"direction must be 'up' or 'down', got {direction!r}")
    up = _base_chirp_cached(cfg.sf, cfg.bw_hz, cfg.os, cfg.kind)
    return np.conj(up) if direction == "down" else up.copy()


def modulate_symbol(cfg: ChirpConfig, s: int) -> np.ndarray:
    """Chirp symbol for value s: base sweep shifted by s*BW/N, folded."""
    n = cfg.n_bins
    if not 0 <= s < n:
        raise ValueError(f"symbol value {s} outside [0, {n})")
    return _symbol_table(cfg)[int(s)].copy()


@lru_cache(maxsize=16)
def _symbol_table_cached(sf, bw_hz, os, kind):
    cfg = ChirpConfig(sf=sf, bw_hz=bw_hz, os=os, kind=kind)
    n, m = cfg.n_bins, cfg.samples_per_symbol
    bw = cfg.bw_hz
    t_mid = (np.arange(m) + 0.5) / cfg.sample_rate_hz
    u = t_mid / cfg.symbol_period_s
    base = (bw * u - bw / 2.0) if kind == LINEAR else (bw * u * u - bw / 2.0)
    f = base[None, :] + (np.arange(n) * bw / n)[:, None]   # (N, M) trajectories
    blocks = f.reshape(n, n, os)
    wraps = np.floor((blocks[:, :, :1] + bw / 2.0) / bw)
    f = (blocks - bw * wraps).reshape(n, m)
    phase = 2.0 * np.pi * np.cumsum(f, axis=1) / cfg.sample_rate_hz
    phase = np.concatenate((np.zeros((n, 1)), phase[:, :-1]), axis=1)
    table = np.exp(1j * phase)
    table.setflags(write=False)
    return table


def _symbol_table(cfg: ChirpConfig) -> np.ndarray:
    """(N, N*os) read-only matrix of all modulated symbols."""
    return _symbol_table_cached(cfg.sf, cfg.bw_hz, cfg.os, cfg.kind)


def symbol_waveforms(cfg: ChirpConfig) -> np.ndarray:
    """All N modulated symbols as a read-only (N, N*os) matrix."""
    return _symbol_table(cfg)


def modulate_frame(cfg: ChirpConfig, layout: FrameLayout, payload) -> np.ndarray:
    """Preamble upchirps + SFD downchirps + payload symbols, concatenated.

    Preamble and SFD are always linear regardless of cfg.kind.
    """
    payload = np.asarray(payload, dtype=np.int64)
    if payload.ndim != 1 or len(payload) != layout.n_payload:
        raise ValueError(
            f"payload length {payload.size} != layout.n_payload {layout.n_payload}"
        )
    if payload.size and (payload.min() < 0 or payload.max() >= cfg.n_bins):
        raise ValueError("payload symbol value out of range")
    lin_cfg = ChirpConfig(cfg.sf, cfg.bw_hz, cfg.os, LINEAR, cfg.carrier_hz)
    up = base_chirp(lin_cfg, "up")
    down = base_chirp(lin_cfg, "down")
    parts = [np.tile(up, layout.n_preamble), np.tile(down, layout.n_sfd)]
    if payload.size:
        parts.append(_symbol_table(cfg)[payload].reshape(-1))
    return np.concatenate(parts)
