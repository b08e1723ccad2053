"""Receiver chain: packet gating, per-path timing via preamble
correlation with SFD validation, dechirp demodulation, spectral
combination across paths, and LLR extraction.

Path candidates are offsets whose preamble-accumulated correlation
clears a relative threshold; each accepted candidate must also show the
two SFD downchirps at the right offsets, which rejects the whole-symbol
(one-preamble-shifted) ghost alignments that plain correlation cannot
distinguish.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal as _sig

from .chirp import LINEAR, ChirpConfig, FrameLayout, base_chirp
from .errors import DetectionError, TruncatedFrameError
from .iqio import IqBuffer

# Gain applied to the normalized-amplitude LLR before decoding. The raw
# softmax of band-normalized amplitudes caps the per-symbol likelihood
# ratio at e (the normalization divides the contrast by the sum over all
# bins), which carries ~0.004 bits of evidence per symbol and cannot
# drive belief propagation; this gain restores a contrast comparable to
# the true amplitude likelihoods in the waterfall region. Calibrated over
# the AWGN sweep; argmax decisions are scale-invariant.
DEFAULT_LLR_SCALE = 512.0

ENERGY_GATE_FACTOR = 1.5     # chunk energy vs. minimum chunk energy
CORR_REL_THRESHOLD = 0.35    # peak acceptance vs. global correlation max
CORR_ABS_FLOOR = 0.2         # reject windows that are essentially noise
SFD_MIN_RATIO = 0.4          # weaker SFD window vs. preamble correlation
MAX_PATHS_DEFAULT = 8
SEARCH_SPAN_SYMBOLS = 4      # candidate-start span beyond the hot region


@dataclass(frozen=True)
class PathEstimate:
    """One propagation path: frame start sample and correlation quality."""

    start_index: int
    corr_mag: float


@dataclass
class DemodOutput:
    hard_symbols: np.ndarray
    llr_vectors: np.ndarray
    paths_used: list
    per_path_spectra: np.ndarray | None = None


def detect_packet(buf: IqBuffer, cfg: ChirpConfig, layout: FrameLayout):
    """Coarse energy gate: sample range of symbol-length chunks whose
    energy exceeds ENERGY_GATE_FACTOR x the quietest chunk.

    Returns (start, stop) in samples, or None when nothing stands out
    (a valid outcome, not an error).
    """
    m = cfg.samples_per_symbol
    x = np.asarray(buf.samples)
    n_chunks = len(x) // m
    if n_chunks < 2:
        return None
    energy = (np.abs(x[: n_chunks * m]) ** 2).reshape(n_chunks, m).sum(axis=1)
    hot = energy > ENERGY_GATE_FACTOR * energy.min()
    if not hot.any():
        return None
    first, last = np.flatnonzero(hot)[[0, -1]]
    start = max(0, (first - 1) * m)
    stop = min(len(x), (last + 2) * m)
    return start, stop


def _norm_corr(region: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """Normalized matched-filter magnitude per start offset (in [0, 1])."""
    mf = _sig.fftconvolve(region, np.conj(ref[::-1]), mode="valid")
    e = np.concatenate(([0.0], np.cumsum(np.abs(region) ** 2)))
    win_energy = e[len(ref):] - e[: len(e) - len(ref)]
    denom = np.sqrt(np.maximum(win_energy, 1e-300) * np.sum(np.abs(ref) ** 2))
    return np.minimum(np.abs(mf) / denom, 1.0)


def detect_paths(
    buf: IqBuffer,
    window,
    cfg: ChirpConfig,
    layout: FrameLayout,
    max_paths: int = MAX_PATHS_DEFAULT,
    rel_threshold: float = CORR_REL_THRESHOLD,
    cancellation_len: int | None = None,
    sfd_min_ratio: float = SFD_MIN_RATIO,
    abs_floor: float = CORR_ABS_FLOOR,
) -> list:
    """Per-path frame starts inside a coarse window, best correlation first.

    Greedy acceptance of correlation peaks, suppressing candidates within
    cancellation_len (default: os samples) of an accepted one, each
    validated against both SFD downchirps.
    """
    if cancellation_len is None:
        cancellation_len = cfg.os
    m = cfg.samples_per_symbol
    x = np.asarray(buf.samples)
    w0, _w1 = window
    lo = max(0, w0 - m)
    n_cand = min(SEARCH_SPAN_SYMBOLS * m + m, max(1, len(x) - lo - layout.n_symbols * m))
    hi = lo + n_cand + (layout.n_preamble + layout.n_sfd) * m + m
    region = x[lo : min(len(x), hi)]
    if len(region) < (layout.n_preamble + layout.n_sfd) * m + m:
        raise DetectionError("window too short for preamble + SFD correlation")

    lin_cfg = ChirpConfig(cfg.sf, cfg.bw_hz, cfg.os, LINEAR, cfg.carrier_hz)
    cu = _norm_corr(region, base_chirp(lin_cfg, "up"))
    cd = _norm_corr(region, base_chirp(lin_cfg, "down"))

    n_cand = min(n_cand, len(cu) - (layout.n_preamble - 1) * m)
    if n_cand <= 0:
        raise DetectionError("no room for preamble correlation")
    acc = np.mean(
        np.stack([cu[p * m : p * m + n_cand] for p in range(layout.n_preamble)]),
        axis=0,
    )
    gmax = acc.max()
    if gmax <= 0:
        raise DetectionError("empty correlation")

    sfd0 = layout.n_preamble * m
    accepted: list[PathEstimate] = []
    for idx in np.argsort(acc, kind="stable")[::-1]:
        if acc[idx] < max(rel_threshold * gmax, abs_floor):
            break
        if len(accepted) >= max_paths:
            break
        # exclusion zone is cancellation_len samples on each side, inclusive
        if any(abs(idx + lo - p.start_index) <= cancellation_len for p in accepted):
            continue
        down_windows = [idx + sfd0 + k * m for k in range(min(layout.n_sfd, 2))]
        if any(w >= len(cd) for w in down_windows):
            continue
        if down_windows and min(cd[w] for w in down_windows) < sfd_min_ratio * acc[idx]:
            continue
        accepted.append(PathEstimate(start_index=int(idx + lo), corr_mag=float(acc[idx])))
    if not accepted:
        raise DetectionError(
            f"no path above {rel_threshold:.2f} x max correlation passed SFD validation"
        )
    accepted.sort(key=lambda p: -p.corr_mag)
    return accepted


def dechirp_window(buf: IqBuffer, start: int, cfg: ChirpConfig) -> np.ndarray:
    """Amplitude spectrum of one aligned symbol window.

    The window is decimated to the non-oversampled grid (phase anchored
    at `start`), multiplied by the kind-matched conjugate base chirp, and
    transformed by an N-point FFT.
    """
    m = cfg.samples_per_symbol
    x = np.asarray(buf.samples)
    if start < 0 or start + m > len(x):
        raise ValueError(f"window [{start}, {start + m}) outside buffer of {len(x)}")
    ref = np.conj(base_chirp(ChirpConfig(cfg.sf, cfg.bw_hz, 1, cfg.kind), "up"))
    win = x[start : start + m : cfg.os]
    return np.abs(np.fft.fft(win * ref))


def demodulate_paths(
    buf: IqBuffer,
    paths,
    cfg: ChirpConfig,
    layout: FrameLayout,
    n_payload: int | None = None,
) -> np.ndarray:
    """Per-path, per-symbol amplitude spectra: array (n_paths, n_payload, N)."""
    if not paths:
        raise ValueError("need at least one path estimate")
    if n_payload is None:
        n_payload = layout.n_payload
    m = cfg.samples_per_symbol
    x = np.asarray(buf.samples)
    ref = np.conj(base_chirp(ChirpConfig(cfg.sf, cfg.bw_hz, 1, cfg.kind), "up"))
    out = np.empty((len(paths), n_payload, cfg.n_bins))
    for pi, p in enumerate(paths):
        start = p.start_index + layout.payload_offset(cfg)
        stop = start + n_payload * m
        if start < 0 or stop > len(x):
            raise TruncatedFrameError(
                f"payload of path at {p.start_index} spans [{start}, {stop}) "
                f"but buffer holds {len(x)} samples"
            )
        wins = x[start:stop].reshape(n_payload, m)[:, :: cfg.os]
        out[pi] = np.abs(np.fft.fft(wins * ref[None, :], axis=1))
    return out


def combine_paths(spectra) -> np.ndarray:
    """Elementwise sum of amplitude spectra (one symbol or a whole frame)."""
    arrs = [np.asarray(s) for s in spectra]
    if not arrs:
        raise ValueError("nothing to combine")
    shape = arrs[0].shape
    if any(a.shape != shape for a in arrs):
        raise ValueError("spectra shapes differ")
    return np.sum(arrs, axis=0)


def spectrum_to_llr(amps, scale: float = 1.0) -> np.ndarray:
    """Log-likelihood ratios against bin 0 from one amplitude spectrum.

    Normalizes amplitudes to [0, 1] over the window, then
    llr[j] = scale * (amp_n[j] - amp_n[0]) / sum(amp_n). A flat spectrum
    carries no evidence and maps to the all-zero vector.
    """
    amps = np.asarray(amps, dtype=np.float64)
    squeeze = amps.ndim == 1
    a = amps[None, :] if squeeze else amps
    mn = a.min(axis=1, keepdims=True)
    mx = a.max(axis=1, keepdims=True)
    span = mx - mn
    flat = span <= 0
    a_n = (a - mn) / np.where(flat, 1.0, span)
    total = a_n.sum(axis=1, keepdims=True)
    llr = scale * (a_n - a_n[:, :1]) / np.where(total <= 0, 1.0, total)
    llr = np.where(flat, 0.0, llr)
    return llr[0] if squeeze else llr


def peak_list(amps, threshold: float | None = None):
    """Bins whose amplitude exceeds the threshold (default mean + 3*std),
    strongest first, as (bin, amplitude) pairs."""
    amps = np.asarray(amps, dtype=np.float64)
    if threshold is None:
        threshold = amps.mean() + 3.0 * amps.std()
    bins = np.flatnonzero(amps > threshold)
    order = np.argsort(amps[bins], kind="stable")[::-1]
    return [(int(b), float(amps[b])) for b in bins[order]]


def demodulate_frame(
    buf: IqBuffer,
    cfg: ChirpConfig,
    layout: FrameLayout,
    mode: str = "merge",
    llr_scale: float = DEFAULT_LLR_SCALE,
    max_paths: int = MAX_PATHS_DEFAULT,
    keep_spectra: bool = False,
    pad_fallback: bool = False,
) -> DemodOutput:
    """Full chain: detect packet and paths, demodulate each path,
    combine (merge) or keep only the strongest (nomerge), emit decisions
    and LLR vectors.

    pad_fallback retries once with one symbol of silence appended on both
    sides when the energy gate sees nothing; this lets captures that
    start exactly at the frame (uniform chunk energy) through, while pure
    noise still dies at the correlation floor.
    """
    if mode not in ("merge", "nomerge"):
        raise ValueError(f"mode must be 'merge' or 'nomerge', got {mode!r}")
    window = detect_packet(buf, cfg, layout)
    pad_shift = 0
    if window is None and pad_fallback:
        m = cfg.samples_per_symbol
        padded = np.concatenate(
            [np.zeros(m, dtype=complex), np.asarray(buf.samples), np.zeros(m, dtype=complex)]
        )
        buf = IqBuffer(padded, buf.sample_rate_hz)
        pad_shift = m
        window = detect_packet(buf, cfg, layout)
    if window is None:
        raise DetectionError("no packet energy above the chunk gate")
    paths = detect_paths(buf, window, cfg, layout, max_paths=max_paths)
    if mode == "nomerge":
        paths = paths[:1]
    spectra = demodulate_paths(buf, paths, cfg, layout)
    combined = spectra.sum(axis=0)
    hard = combined.argmax(axis=1)
    llrs = spectrum_to_llr(combined, scale=llr_scale)
    if pad_shift:
        paths = [
            PathEstimate(p.start_index - pad_shift, p.corr_mag) for p in paths
        ]
    return DemodOutput(
        hard_symbols=hard,
        llr_vectors=llrs,
        paths_used=paths,
        per_path_spectra=spectra if keep_spectra else None,
    )


def dump_spectra_csv(per_path_spectra, path) -> None:
    """Diagnostics: per-symbol spectra as CSV rows
    (symbol_index, path_index, bin, amplitude)."""
    arr = np.asarray(per_path_spectra)
    with open(path, "w") as fh:
        fh.write("symbol_index,path_index,bin,amplitude\n")
        for pi in range(arr.shape[0]):
            for si in range(arr.shape[1]):
                for b in range(arr.shape[2]):
                    fh.write(f"{si},{pi},{b},{arr[pi, si, b]:.6g}\n")
