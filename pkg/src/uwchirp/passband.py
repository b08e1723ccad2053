"""Complex-baseband <-> real-passband conversion.

Upconversion resamples the baseband to the passband rate and multiplies
by the carrier; downconversion mixes back and resamples down, relying on
the polyphase resampler's anti-alias filter to reject both the
double-carrier image and out-of-band noise.

The round trip is better than -40 dB relative error at os >= 2. At
os = 1 the chirp frame's own symbol-boundary splatter exceeds the band
representable at BW samples/s, so no conversion chain can invert it that
precisely.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import signal

from .chirp import ChirpConfig
from .iqio import IqBuffer

DEFAULT_PASSBAND_RATE = 96000.0


def _check_rates(cfg: ChirpConfig, passband_rate: float) -> None:
    if cfg.carrier_hz < cfg.bw_hz / 2:
        raise ValueError(
            f"carrier {cfg.carrier_hz} Hz below bw/2 = {cfg.bw_hz / 2} Hz"
        )
    if cfg.carrier_hz + cfg.bw_hz / 2 > passband_rate / 2:
        raise ValueError(
            f"carrier + bw/2 = {cfg.carrier_hz + cfg.bw_hz / 2} Hz exceeds "
            f"Nyquist {passband_rate / 2} Hz"
        )


def _resample_factors(rate_in: float, rate_out: float) -> tuple[int, int]:
    ri, ro = int(round(rate_in)), int(round(rate_out))
    if abs(rate_in - ri) > 1e-6 or abs(rate_out - ro) > 1e-6:
        raise ValueError("sample rates must be integral for rational resampling")
    g = math.gcd(ri, ro)
    return ro // g, ri // g


def to_passband(
    buf: IqBuffer, cfg: ChirpConfig, passband_rate: float = DEFAULT_PASSBAND_RATE
) -> np.ndarray:
    """Real passband signal at passband_rate centred on cfg.carrier_hz."""
    _check_rates(cfg, passband_rate)
    up, down = _resample_factors(buf.sample_rate_hz, passband_rate)
    x = signal.resample_poly(buf.samples, up, down)
    t = np.arange(len(x)) / passband_rate
    return np.real(x * np.exp(2j * np.pi * cfg.carrier_hz * t))


def from_passband(
    pcm,
    cfg: ChirpConfig,
    passband_rate: float = DEFAULT_PASSBAND_RATE,
    n_samples: int | None = None,
) -> IqBuffer:
    """Invert to_passband: mix down and resample back to bw*os.

    n_samples optionally trims/pads the result to a known baseband length.
    """
    _check_rates(cfg, passband_rate)
    pcm = np.asarray(pcm, dtype=np.float64)
    t = np.arange(len(pcm)) / passband_rate
    mixed = 2.0 * pcm * np.exp(-2j * np.pi * cfg.carrier_hz * t)
    up, down = _resample_factors(passband_rate, cfg.sample_rate_hz)
    x = signal.resample_poly(mixed, up, down)
    if n_samples is not None:
        if len(x) < n_samples:
            x = np.concatenate([x, np.zeros(n_samples - len(x), dtype=complex)])
        x = x[:n_samples]
    return IqBuffer(x, cfg.sample_rate_hz)
