"""IQ and passband file formats."""

import struct

import numpy as np
import pytest

from uwchirp.chirp import ChirpConfig
from uwchirp.iqio import (
    IqBuffer,
    read_iq,
    read_passband,
    write_iq,
    write_passband,
)


def test_iq_round_trip(tmp_path):
    cfg = ChirpConfig(sf=9, os=4, kind="linear", bw_hz=6000.0)
    rng = np.random.default_rng(0)
    samples = rng.standard_normal(1000) + 1j * rng.standard_normal(1000)
    p = tmp_path / "x.iq"
    write_iq(p, IqBuffer(samples, cfg.sample_rate_hz), cfg)
    buf, got = read_iq(p)
    assert got == cfg
    assert len(buf) == 1000
    # float32 storage quantization only
    assert np.abs(buf.samples - samples).max() < 1e-6


def test_iq_header_is_24_bytes(tmp_path):
    cfg = ChirpConfig()
    p = tmp_path / "h.iq"
    write_iq(p, IqBuffer(np.zeros(3, dtype=complex), cfg.sample_rate_hz), cfg)
    raw = p.read_bytes()
    assert len(raw) == 24 + 3 * 8
    assert raw[:4] == b"UWIQ"


def test_iq_bad_magic(tmp_path):
    p = tmp_path / "bad.iq"
    p.write_bytes(b"NOPE" + b"\x00" * 40)
    with pytest.raises(ValueError):
        read_iq(p)


def test_iq_truncated_payload(tmp_path):
    cfg = ChirpConfig()
    p = tmp_path / "t.iq"
    write_iq(p, IqBuffer(np.zeros(10, dtype=complex), cfg.sample_rate_hz), cfg)
    raw = p.read_bytes()
    p.write_bytes(raw[:-8])
    with pytest.raises(ValueError):
        read_iq(p)


def test_iq_buffer_rejects_nonfinite():
    with pytest.raises(ValueError):
        IqBuffer(np.array([1.0, np.nan]), 12000.0)
    with pytest.raises(ValueError):
        IqBuffer(np.array([1.0, np.inf * 1j]), 12000.0)


def test_passband_file_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    x = rng.standard_normal(500).astype(np.float32)
    p = tmp_path / "p.f32"
    write_passband(p, x)
    back = read_passband(p)
    assert np.array_equal(back.astype(np.float32), x)
