"""Multipath channel: per-tap delay/complex gain, calibrated AWGN, and
channel-profile persistence.

Delays are in samples at the buffer's (oversampled) rate. Integer delays
are applied by shifting; fractional delays use a 31-tap Hann-windowed
sinc interpolator. SNR is defined per complex baseband sample over the
signal support of the clean multipath output.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .errors import ProfileFormatError
from .iqio import IqBuffer

SINC_HALF = 15  # 31-tap interpolator


@dataclass(frozen=True)
class ChannelTap:
    delay_samples: float
    gain: complex

    def __post_init__(self):
        if self.delay_samples < 0:
            raise ValueError("tap delay must be non-negative")


@dataclass(frozen=True)
class ChannelProfile:
    """Sorted multipath taps plus a target per-sample SNR (dB, inf = off)."""

    taps: tuple
    snr_db: float = float("inf")

    def __post_init__(self):
        taps = tuple(
            t if isinstance(t, ChannelTap) else ChannelTap(t[0], complex(t[1]))
            for t in self.taps
        )
        if not taps:
            raise ValueError("profile needs at least one tap")
        taps = tuple(sorted(taps, key=lambda t: t.delay_samples))
        if sum(abs(t.gain) ** 2 for t in taps) <= 0:
            raise ValueError("total tap power must be positive")
        object.__setattr__(self, "taps", taps)

    @property
    def max_delay(self) -> float:
        return self.taps[-1].delay_samples

    def with_snr(self, snr_db: float) -> "ChannelProfile":
        return replace(self, snr_db=snr_db)

    def strong_tap_count(self, rel_threshold: float = 0.6) -> int:
        """Taps within rel_threshold of the strongest tap's magnitude."""
        peak = max(abs(t.gain) for t in self.taps)
        return sum(1 for t in self.taps if abs(t.gain) >= rel_threshold * peak)


def _fractional_kernel(mu: float) -> np.ndarray:
    n = np.arange(-SINC_HALF, SINC_HALF + 1)
    window = 0.5 + 0.5 * np.cos(np.pi * (n - mu) / (SINC_HALF + 1))
    return np.sinc(n - mu) * window


def _clean_multipath(x: np.ndarray, profile: ChannelProfile) -> np.ndarray:
    out = np.zeros(len(x) + int(np.ceil(profile.max_delay)), dtype=np.complex128)
    for tap in profile.taps:
        d_int = int(np.floor(tap.delay_samples))
        mu = tap.delay_samples - d_int
        if mu < 1e-12:
            out[d_int : d_int + len(x)] += tap.gain * x
        else:
            y = np.convolve(x, _fractional_kernel(mu))
            start = d_int - SINC_HALF
            lo = max(0, start)
            hi = min(len(out), start + len(y))
            out[lo:hi] += tap.gain * y[lo - start : hi - start]
    return out


def apply_channel(buf: IqBuffer, profile: ChannelProfile, seed: int) -> IqBuffer:
    """Clean multipath sum plus circular Gaussian noise at profile.snr_db.

    Output length is input length + ceil(max tap delay). Noise power is
    calibrated against the mean signal power over the support (samples
    carrying signal energy), so silence padding does not dilute the SNR.
    """
    x = np.asarray(buf.samples, dtype=np.complex128)
    clean = _clean_multipath(x, profile)
    if not np.isfinite(profile.snr_db):
        return IqBuffer(clean, buf.sample_rate_hz)
    mag = np.abs(clean)
    peak = mag.max()
    support = mag > 1e-9 * peak if peak > 0 else np.zeros(len(clean), bool)
    p_sig = np.mean(mag[support] ** 2) if support.any() else 0.0
    sigma2 = p_sig / 10.0 ** (profile.snr_db / 10.0)
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(len(clean)) + 1j * rng.standard_normal(len(clean))
    return IqBuffer(clean + np.sqrt(sigma2 / 2.0) * noise, buf.sample_rate_hz)


def random_profile(
    n_paths: int,
    max_delay_samples: int,
    seed: int,
    amp_range: tuple[float, float] = (0.3, 1.0),
    first_tap_unit: bool = True,
    snr_db: float = float("inf"),
) -> ChannelProfile:
    """Random multipath draw: delays uniform on (0, max_delay_samples]
    (oversampled grid), amplitudes uniform in amp_range, phases uniform.

    With first_tap_unit the leading tap is fixed at (0, 1+0j); otherwise
    its amplitude is drawn like the rest (phase 0, the global reference).
    """
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    rng = np.random.default_rng(seed)
    lo, hi = amp_range
    first_gain = 1.0 + 0.0j if first_tap_unit else complex(rng.uniform(lo, hi))
    taps = [ChannelTap(0.0, first_gain)]
    for _ in range(n_paths - 1):
        delay = float(rng.integers(1, max_delay_samples + 1))
        amp = rng.uniform(lo, hi)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        taps.append(ChannelTap(delay, amp * np.exp(1j * phase)))
    return ChannelProfile(tuple(taps), snr_db=snr_db)


def save_profile(profile: ChannelProfile, path) -> None:
    doc = {
        "taps": [
            {"delay": t.delay_samples, "gain_re": t.gain.real, "gain_im": t.gain.imag}
            for t in profile.taps
        ],
        "snr_db": None if not np.isfinite(profile.snr_db) else profile.snr_db,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_profile(path) -> ChannelProfile:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise ProfileFormatError(f"{path}:{e.lineno}: {e.msg}") from e
    try:
        taps = tuple(
            ChannelTap(t["delay"], complex(t["gain_re"], t["gain_im"]))
            for t in doc["taps"]
        )
        snr = doc.get("snr_db")
        profile = ChannelProfile(taps, float("inf") if snr is None else float(snr))
    except (KeyError, TypeError, ValueError) as e:
        raise ProfileFormatError(f"{path}: {e}") from e
    return profile
