"""Seeded Monte-Carlo experiments: symbol-collision probability under
random multipath, coded BER over AWGN, and the full-frame multipath
study over the stored channel profiles (merge vs. strongest-path-only).

Every trial derives its RNG from (seed, point indices, trial index), so
results are independent of execution order and identical across reruns.
Data and channel draws do not depend on scheme or receiver mode: the
same error patterns hit every configuration of one trial.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .channel import ChannelProfile, apply_channel, load_profile, random_profile
from .chirp import (
    LINEAR,
    QUADRATIC,
    ChirpConfig,
    FrameLayout,
    base_chirp,
    modulate_frame,
    modulate_symbol,
    symbol_waveforms,
)
from .codec import CodecConfig, make_codec
from .codec.binary import symbols_to_bits
from .errors import DetectionError, TruncatedFrameError
from .iqio import IqBuffer
from .receiver import DEFAULT_LLR_SCALE, dechirp_window, demodulate_frame, spectrum_to_llr

COLLISION = "collision"
AWGN_BER = "awgn_ber"
MULTIPATH = "multipath"
EXPERIMENTS = (COLLISION, AWGN_BER, MULTIPATH)

# collision-study tap amplitudes: every path (incl. the first) i.i.d. in
# this range, uniform phase; reflections in a reverberant tank are
# comparable to the direct arrival and may exceed it
COLLISION_AMP_RANGE = (0.8, 1.0)

DEFAULT_SNR_SWEEP_AWGN = (-15.0, -14.0, -13.0, -12.0, -11.0, -10.0, -8.0)
DEFAULT_SNR_SWEEP_MULTIPATH = (-10.0, -5.0, -2.0, 2.0, 6.0, 12.0, 20.0)


@dataclass(frozen=True)
class ExperimentSpec:
    experiment: str
    trials: int = 0                # 0 = experiment default
    snr_list_db: tuple = ()
    n_paths_list: tuple = (1, 2, 3, 4)
    kinds: tuple = ()              # () = experiment default
    schemes: tuple = ("nb_ldpc",)
    modes: tuple = ("merge",)
    seed: int = 1234
    paper_scale: bool = False
    llr_scale: float = DEFAULT_LLR_SCALE
    sf: int = 8
    bw_hz: float = 6000.0
    os: int = 2
    n_info_bits: int = 400
    max_iters: int = 50
    workers: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"experiment must be one of {EXPERIMENTS}")
        if self.trials < 0:
            raise ValueError("trials must be >= 0")
        if not self.n_paths_list or min(self.n_paths_list) < 1:
            raise ValueError("n_paths_list must be non-empty, entries >= 1")
        if not self.schemes or not self.modes:
            raise ValueError("schemes and modes must be non-empty")

    @property
    def eff_trials(self) -> int:
        if self.trials:
            return self.trials
        if self.experiment == COLLISION:
            return 2000
        return 1000 if self.paper_scale else 200

    @property
    def eff_kinds(self) -> tuple:
        if self.kinds:
            return self.kinds
        if self.experiment == COLLISION:
            return (LINEAR, QUADRATIC)
        return (LINEAR,) if self.experiment == AWGN_BER else (QUADRATIC,)

    @property
    def eff_snrs(self) -> tuple:
        if self.snr_list_db:
            return self.snr_list_db
        if self.experiment == AWGN_BER:
            return DEFAULT_SNR_SWEEP_AWGN
        return DEFAULT_SNR_SWEEP_MULTIPATH


@dataclass
class MetricsRecord:
    experiment: str
    kind: str
    scheme: str | None
    mode: str | None
    n_paths: int | None
    snr_db: float | None
    trials: int
    ser: float | None
    raw_ber: float | None
    ber: float | None
    per: float | None
    throughput_bps: float | None


def _throughput(per: float, n_info_bits: int, n_payload: int, cfg: ChirpConfig) -> float:
    # ordered so the noiseless default geometry lands exactly on 93.75
    return (1.0 - per) * (n_info_bits * cfg.bw_hz) / (n_payload * cfg.n_bins)


def stored_profiles() -> list:
    """The versioned pool-style profiles, as (name, ChannelProfile) pairs.

    UWCHIRP_PROFILE_DIR overrides the packaged directory.
    """
    override = os.environ.get("UWCHIRP_PROFILE_DIR")
    if override:
        names = sorted(n for n in os.listdir(override) if n.endswith(".json"))
        return [(n[:-5], load_profile(os.path.join(override, n))) for n in names]
    root = resources.files("uwchirp").joinpath("profiles")
    out = []
    for entry in sorted(root.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".json"):
            with resources.as_file(entry) as p:
                out.append((entry.name[:-5], load_profile(p)))
    return out


# --- collision probability (random multipath, noiseless) ---

def run_collision(spec: ExperimentSpec) -> list:
    records = []
    trials = spec.eff_trials
    for kind in spec.eff_kinds:
        cfg = ChirpConfig(sf=spec.sf, bw_hz=spec.bw_hz, os=spec.os, kind=kind)
        m = cfg.samples_per_symbol
        for n_paths in spec.n_paths_list:
            sym_err = 0
            bit_err = 0
            for t in range(trials):
                rng = np.random.default_rng([spec.seed, _kind_id(kind), n_paths, t])
                s_prev, s_tgt = (int(v) for v in rng.integers(0, cfg.n_bins, 2))
                profile = random_profile(
                    n_paths,
                    m,
                    [spec.seed, _kind_id(kind), n_paths, t, 1],
                    amp_range=COLLISION_AMP_RANGE,
                    first_tap_unit=False,
                )
                tx = np.concatenate(
                    [modulate_symbol(cfg, s_prev), modulate_symbol(cfg, s_tgt)]
                )
                rx = apply_channel(IqBuffer(tx, cfg.sample_rate_hz), profile, 0)
                decided = int(np.argmax(dechirp_window(rx, m, cfg)))
                if decided != s_tgt:
                    sym_err += 1
                    bit_err += int(bin(decided ^ s_tgt).count("1"))
            records.append(
                MetricsRecord(
                    COLLISION, kind, None, None, n_paths, None, trials,
                    ser=sym_err / trials,
                    raw_ber=bit_err / (trials * spec.sf),
                    ber=None, per=None, throughput_bps=None,
                )
            )
    return records


def _kind_id(kind: str) -> int:
    return 0 if kind == LINEAR else 1


# --- coded BER over AWGN ---

_CODEC_CACHE: dict = {}


def _get_codec(scheme: str, sf: int, n_info_bits: int, max_iters: int, seed: int):
    key = (scheme, sf, n_info_bits, max_iters, seed)
    if key not in _CODEC_CACHE:
        cfg = CodecConfig(scheme=scheme, n_info_bits=n_info_bits,
                          max_iters=max_iters, seed=seed)
        _CODEC_CACHE[key] = make_codec(cfg, sf)
    return _CODEC_CACHE[key]


def _awgn_point(args) -> MetricsRecord:
    spec_dict, scheme, snr_db, si = args
    spec = ExperimentSpec(**spec_dict)
    kind = spec.eff_kinds[0]
    cfg = ChirpConfig(sf=spec.sf, bw_hz=spec.bw_hz, os=spec.os, kind=kind)
    codec = _get_codec(scheme, spec.sf, spec.n_info_bits, spec.max_iters, spec.seed)
    n_payload = codec.n_payload_symbols
    m = cfg.samples_per_symbol
    trials = spec.eff_trials
    identity = ChannelProfile(((0.0, 1.0 + 0.0j),), snr_db=snr_db)
    sym_err = raw_bit_err = bit_err = pkt_err = 0
    for t in range(trials):
        data_rng = np.random.default_rng([spec.seed, 17, si, t])
        bits = data_rng.integers(0, 2, spec.n_info_bits)
        syms = codec.encode_bits(bits)
        # aligned study: payload symbols only, no frame overhead
        tx = symbol_waveforms(cfg)[syms].reshape(-1)
        rx = apply_channel(IqBuffer(tx, cfg.sample_rate_hz), identity,
                           [spec.seed, 18, si, t])
        spectra = _aligned_spectra(rx.samples, cfg, n_payload)
        hard = spectra.argmax(axis=1)
        sym_err += int((hard != syms).sum())
        raw_bit_err += int(
            (symbols_to_bits(hard, spec.sf) != symbols_to_bits(syms, spec.sf)).sum()
        )
        llrs = spectrum_to_llr(spectra, scale=spec.llr_scale)
        decoded, _ = codec.decode(llrs)
        errs = int((np.asarray(decoded) != bits).sum())
        bit_err += errs
        pkt_err += bool(errs)
    per = pkt_err / trials
    return MetricsRecord(
        AWGN_BER, kind, scheme, None, 1, snr_db, trials,
        ser=sym_err / (trials * n_payload),
        raw_ber=raw_bit_err / (trials * n_payload * spec.sf),
        ber=bit_err / (trials * spec.n_info_bits),
        per=per,
        throughput_bps=_throughput(per, spec.n_info_bits, n_payload, cfg),
    )


def _aligned_spectra(samples: np.ndarray, cfg: ChirpConfig, n_symbols: int) -> np.ndarray:
    m = cfg.samples_per_symbol
    ref = np.conj(base_chirp(ChirpConfig(cfg.sf, cfg.bw_hz, 1, cfg.kind), "up"))
    wins = samples[: n_symbols * m].reshape(n_symbols, m)[:, :: cfg.os]
    return np.abs(np.fft.fft(wins * ref[None, :], axis=1))


def run_awgn_ber(spec: ExperimentSpec) -> list:
    points = [
        (dataclass_asdict(spec), scheme, snr, si)
        for scheme in spec.schemes
        for si, snr in enumerate(spec.eff_snrs)
    ]
    return _run_points(_awgn_point, points, spec.workers)


# --- full-frame multipath study over stored profiles ---

def _multipath_point(args) -> MetricsRecord:
    spec_dict, scheme, mode, snr_db, si, profiles = args
    spec = ExperimentSpec(**spec_dict)
    kind = spec.eff_kinds[0]
    cfg = ChirpConfig(sf=spec.sf, bw_hz=spec.bw_hz, os=spec.os, kind=kind)
    codec = _get_codec(scheme, spec.sf, spec.n_info_bits, spec.max_iters, spec.seed)
    n_payload = codec.n_payload_symbols
    layout = FrameLayout(8, 2, n_payload)
    m = cfg.samples_per_symbol
    n_coded_bits = n_payload * spec.sf
    trials = spec.eff_trials
    per_profile = max(1, trials // len(profiles))
    sym_err = raw_bit_err = bit_err = pkt_err = 0
    n_pkts = 0
    pad = np.zeros(m, dtype=complex)
    for pi, (_name, profile) in enumerate(profiles):
        for t in range(per_profile):
            n_pkts += 1
            data_rng = np.random.default_rng([spec.seed, 23, pi, si, t])
            bits = data_rng.integers(0, 2, spec.n_info_bits)
            syms = codec.encode_bits(bits)
            frame = modulate_frame(cfg, layout, syms)
            tx = np.concatenate([pad, frame, pad])
            rx = apply_channel(
                IqBuffer(tx, cfg.sample_rate_hz),
                profile.with_snr(snr_db),
                [spec.seed, 29, pi, si, t],
            )
            try:
                out = demodulate_frame(rx, cfg, layout, mode=mode,
                                       llr_scale=spec.llr_scale)
            except (DetectionError, TruncatedFrameError):
                # nothing recovered: charge the full packet
                pkt_err += 1
                sym_err += n_payload
                raw_bit_err += n_coded_bits
                bit_err += spec.n_info_bits
                continue
            sym_err += int((out.hard_symbols != syms).sum())
            raw_bit_err += int(
                (symbols_to_bits(out.hard_symbols, spec.sf)
                 != symbols_to_bits(syms, spec.sf)).sum()
            )
            decoded, _ = codec.decode(out.llr_vectors)
            errs = int((np.asarray(decoded) != bits).sum())
            bit_err += errs
            pkt_err += bool(errs)
    per = pkt_err / n_pkts
    return MetricsRecord(
        MULTIPATH, kind, scheme, mode, None, snr_db, n_pkts,
        ser=sym_err / (n_pkts * n_payload),
        raw_ber=raw_bit_err / (n_pkts * n_coded_bits),
        ber=bit_err / (n_pkts * spec.n_info_bits),
        per=per,
        throughput_bps=_throughput(per, spec.n_info_bits, n_payload, cfg),
    )


def run_multipath(spec: ExperimentSpec, profiles=None) -> list:
    if profiles is None:
        profiles = stored_profiles()
    profiles = list(profiles)
    if not profiles:
        raise ValueError("need at least one channel profile")
    points = [
        (dataclass_asdict(spec), scheme, mode, snr, si, profiles)
        for scheme in spec.schemes
        for mode in spec.modes
        for si, snr in enumerate(spec.eff_snrs)
    ]
    return _run_points(_multipath_point, points, spec.workers)


def run_experiment(spec: ExperimentSpec, profiles=None) -> list:
    if spec.experiment == COLLISION:
        return run_collision(spec)
    if spec.experiment == AWGN_BER:
        return run_awgn_ber(spec)
    return run_multipath(spec, profiles)


def _run_points(fn, points, workers: int) -> list:
    if workers > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, points))
    return [fn(p) for p in points]


def dataclass_asdict(spec: ExperimentSpec) -> dict:
    return {
        f: getattr(spec, f)
        for f in spec.__dataclass_fields__
    }


# --- CSV output ---

CSV_COLUMNS = (
    "experiment", "kind", "scheme", "mode", "n_paths", "snr_db",
    "trials", "ser", "raw_ber", "ber", "per", "throughput_bps",
)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def emit_csv(records, path) -> None:
    """Stable column order and %.6g float formatting: identical inputs
    produce byte-identical files."""
    try:
        with open(path, "w", newline="") as fh:
            fh.write(",".join(CSV_COLUMNS) + "\n")
            for r in records:
                fh.write(",".join(_fmt(getattr(r, c)) for c in CSV_COLUMNS) + "\n")
    except OSError as e:
        raise OSError(f"cannot write CSV to {path}: {e}") from e
