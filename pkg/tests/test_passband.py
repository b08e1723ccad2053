"""Passband conversion round trip and spectral placement."""

import numpy as np
import pytest

from uwchirp.chirp import ChirpConfig, FrameLayout, modulate_frame
from uwchirp.iqio import IqBuffer
from uwchirp.passband import from_passband, to_passband


def test_round_trip_below_minus_40db():
    cfg = ChirpConfig(sf=8, os=2)
    payload = (np.arange(40) * 37) % 256
    frame = modulate_frame(cfg, FrameLayout(8, 2, 40), payload)
    buf = IqBuffer(frame, cfg.sample_rate_hz)
    pcm = to_passband(buf, cfg)
    back = from_passband(pcm, cfg, n_samples=len(frame))
    err = np.sum(np.abs(back.samples - frame) ** 2) / np.sum(np.abs(frame) ** 2)
    assert 10 * np.log10(err) < -40.0


def test_zero_in_zero_out():
    cfg = ChirpConfig()
    pcm = to_passband(IqBuffer(np.zeros(4096, dtype=complex), cfg.sample_rate_hz), cfg)
    assert np.abs(pcm).max() == 0.0


def test_tone_lands_at_carrier_plus_offset():
    cfg = ChirpConfig(sf=8, os=2)
    f_base = 1500.0  # baseband offset
    n = 8192
    t = np.arange(n) / cfg.sample_rate_hz
    tone = np.exp(2j * np.pi * f_base * t)
    pcm = to_passband(IqBuffer(tone, cfg.sample_rate_hz), cfg)
    spec = np.abs(np.fft.rfft(pcm * np.hanning(len(pcm))))
    freqs = np.fft.rfftfreq(len(pcm), 1.0 / 96000.0)
    peak = freqs[spec.argmax()]
    assert abs(peak - (cfg.carrier_hz + f_base)) < 10.0


def test_band_occupies_22_to_28_khz():
    # default carrier 25 kHz, bw 6 kHz: energy confined to 22-28 kHz
    cfg = ChirpConfig(sf=8, os=2)
    frame = modulate_frame(cfg, FrameLayout(8, 2, 20), (np.arange(20) * 11) % 256)
    pcm = to_passband(IqBuffer(frame, cfg.sample_rate_hz), cfg)
    spec = np.abs(np.fft.rfft(pcm)) ** 2
    freqs = np.fft.rfftfreq(len(pcm), 1.0 / 96000.0)
    in_band = (freqs >= 21800) & (freqs <= 28200)
    assert spec[in_band].sum() / spec.sum() > 0.99


def test_carrier_nyquist_validation():
    with pytest.raises(ValueError):
        to_passband(
            IqBuffer(np.zeros(16, dtype=complex), 12000.0),
            ChirpConfig(carrier_hz=2000.0),
        )
    with pytest.raises(ValueError):
        to_passband(
            IqBuffer(np.zeros(16, dtype=complex), 12000.0),
            ChirpConfig(carrier_hz=47000.0),
        )
