"""Command-line front end.

Subcommands: modulate, channel, demod, experiment. Exit codes: 0 on
success, 2 for usage/configuration errors, 3 for runtime detection or
decoding failures. Randomized subcommands take --seed (default 1234,
never time-derived). A config file of `key = value` lines may supply any
long-option value; explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .channel import apply_channel, load_profile, random_profile, save_profile
from .chirp import CHIRP_KINDS, ChirpConfig, FrameLayout, modulate_frame
from .codec import SCHEMES, CodecConfig, make_codec
from .codec.binary import symbols_to_bits
from .errors import DetectionError, TruncatedFrameError, UwChirpError
from .harness import (
    EXPERIMENTS,
    ExperimentSpec,
    emit_csv,
    run_experiment,
    stored_profiles,
)
from .iqio import IqBuffer, read_iq, write_iq
from .receiver import DEFAULT_LLR_SCALE, demodulate_frame

EXIT_USAGE = 2
EXIT_RUNTIME = 3


def _read_config_file(path) -> dict:
    values = {}
    with open(path) as fh:
        for ln_no, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{ln_no}: expected 'key = value'")
            key, val = (s.strip() for s in line.split("=", 1))
            values[key.replace("-", "_")] = val
    return values


def _apply_config_file(args: argparse.Namespace, parser: argparse.ArgumentParser):
    if not getattr(args, "config", None):
        return
    try:
        values = _read_config_file(args.config)
    except (OSError, ValueError) as e:
        parser.error(str(e))
    types = getattr(args, "_option_types", {})
    for key, raw in values.items():
        if not hasattr(args, key):
            parser.error(f"{args.config}: unknown option {key!r}")
        if key in args._explicit:
            continue  # flags override the file
        cast = types.get(key)
        current = getattr(args, key)
        try:
            if isinstance(current, bool) or cast is None and raw.lower() in (
                "true", "false", "yes", "no", "on", "off",
            ):
                value = raw.lower() in ("1", "true", "yes", "on")
            elif cast is not None:
                value = cast(raw)
            else:
                value = raw
        except ValueError as e:
            parser.error(f"{args.config}: bad value for {key!r}: {e}")
        setattr(args, key, value)


class _TrackingParser(argparse.ArgumentParser):
    """Records which destinations were set explicitly on the command line."""

    def parse_args(self, argv=None, namespace=None):
        args = super().parse_args(argv, namespace)
        explicit = set()
        argv = list(sys.argv[1:] if argv is None else argv)
        types = {}
        stack = [self] + [
            sub
            for action in self._subparsers._group_actions
            for sub in action.choices.values()
        ] if self._subparsers else [self]
        for parser in stack:
            for action in parser._actions:
                if action.dest != argparse.SUPPRESS:
                    types.setdefault(action.dest, action.type)
                for opt in action.option_strings:
                    if any(a == opt or a.startswith(opt + "=") for a in argv):
                        explicit.add(action.dest)
        args._explicit = explicit
        args._option_types = types
        return args


def _print_resolved(args: argparse.Namespace) -> None:
    if getattr(args, "verbose", False):
        for key in sorted(vars(args)):
            if key.startswith("_") or key == "func":
                continue
            print(f"# {key} = {getattr(args, key)}", file=sys.stderr)


def _chirp_config(args) -> ChirpConfig:
    return ChirpConfig(sf=args.sf, bw_hz=args.bw, os=args.os, kind=args.kind)


def _parse_list(text, cast):
    items = [s for s in text.replace(",", " ").split() if s]
    return tuple(cast(s) for s in items)


# --- subcommands ---

def cmd_modulate(args, parser) -> int:
    cfg = _chirp_config(args)
    rng = np.random.default_rng(args.seed)
    if args.random is not None and args.payload:
        parser.error("--random conflicts with --payload")
    if args.random is not None:
        bits = rng.integers(0, 2, args.random)
    elif args.payload:
        raw = np.fromfile(args.payload, dtype=np.uint8)
        bits = np.unpackbits(raw).astype(np.int64)
    else:
        parser.error("one of --payload or --random is required")
    if args.encode != "none":
        codec = make_codec(
            CodecConfig(scheme=args.encode, n_info_bits=len(bits), seed=args.seed),
            cfg.sf,
        )
        symbols = codec.encode_bits(bits)
    else:
        if len(bits) % cfg.sf:
            parser.error(f"{len(bits)} bits not divisible by sf={cfg.sf}")
        from .codec.binary import bits_to_symbols

        symbols = bits_to_symbols(bits, cfg.sf)
    layout = FrameLayout(args.preambles, args.sfd, len(symbols))
    frame = modulate_frame(cfg, layout, symbols)
    write_iq(args.out, IqBuffer(frame, cfg.sample_rate_hz), cfg)
    if args.save_payload:
        np.packbits(bits.astype(np.uint8)).tofile(args.save_payload)
    print(
        json.dumps(
            {
                "out": args.out,
                "sf": cfg.sf,
                "kind": cfg.kind,
                "os": cfg.os,
                "bw_hz": cfg.bw_hz,
                "n_preamble": layout.n_preamble,
                "n_sfd": layout.n_sfd,
                "n_payload": layout.n_payload,
                "samples": len(frame),
            }
        )
    )
    return 0


def cmd_channel(args, parser) -> int:
    buf, cfg = read_iq(args.input)
    if args.profile and (args.paths is not None or args.max_delay is not None):
        parser.error("--profile conflicts with --paths/--max-delay")
    if args.profile:
        profile = load_profile(args.profile)
        if args.snr is not None:
            profile = profile.with_snr(args.snr)
    else:
        n_paths = args.paths if args.paths is not None else 3
        max_delay = (
            args.max_delay if args.max_delay is not None else cfg.samples_per_symbol
        )
        profile = random_profile(n_paths, max_delay, args.seed,
                                 snr_db=args.snr if args.snr is not None else float("inf"))
    out = apply_channel(buf, profile, args.seed + 1)
    write_iq(args.out, out, cfg)
    save_profile(profile, args.out + ".profile.json")
    print(
        json.dumps(
            {
                "out": args.out,
                "profile": args.out + ".profile.json",
                "taps": len(profile.taps),
                "snr_db": None if not np.isfinite(profile.snr_db) else profile.snr_db,
                "samples": len(out),
            }
        )
    )
    return 0


def cmd_demod(args, parser) -> int:
    buf, cfg = read_iq(args.input)
    layout = FrameLayout(args.preambles, args.sfd, args.n_payload)
    out = demodulate_frame(
        buf, cfg, layout, mode=args.mode, llr_scale=args.llr_scale,
        pad_fallback=True,
    )
    summary = {
        "mode": args.mode,
        "paths": [
            {"start_index": p.start_index, "corr_mag": round(p.corr_mag, 6)}
            for p in out.paths_used
        ],
        "n_payload": int(len(out.hard_symbols)),
    }
    bits = symbols_to_bits(out.hard_symbols, cfg.sf)
    if args.decode != "none":
        codec = make_codec(
            CodecConfig(scheme=args.decode, n_info_bits=args.info_bits, seed=args.seed),
            cfg.sf,
        )
        decoded, converged = codec.decode(out.llr_vectors)
        bits = np.asarray(decoded)
        summary["converged"] = bool(converged)
    summary["bits"] = "".join(str(int(b)) for b in bits)
    if args.truth:
        truth = np.unpackbits(np.fromfile(args.truth, dtype=np.uint8))[: len(bits)]
        summary["bit_errors"] = int((bits != truth).sum())
        summary["ber"] = summary["bit_errors"] / len(bits)
        ref_syms = out.hard_symbols[: len(truth) // cfg.sf]
        summary["ser_reference_bits"] = len(truth)
    print(json.dumps(summary))
    return 0


def cmd_experiment(args, parser) -> int:
    try:
        spec = ExperimentSpec(
            experiment=args.exp,
            trials=args.trials,
            snr_list_db=_parse_list(args.snr_list, float) if args.snr_list else (),
            n_paths_list=_parse_list(args.paths, int) if args.paths else (1, 2, 3, 4),
            kinds=_parse_list(args.kinds, str) if args.kinds else (),
            schemes=_parse_list(args.schemes, str) if args.schemes else ("nb_ldpc",),
            modes=_parse_list(args.modes, str) if args.modes else ("merge",),
            seed=args.seed,
            paper_scale=args.paper_scale,
            llr_scale=args.llr_scale,
            sf=args.sf,
            workers=args.workers,
        )
    except ValueError as e:
        parser.error(str(e))
    profiles = None
    if args.profile_dir:
        import os as _os

        _os.environ["UWCHIRP_PROFILE_DIR"] = args.profile_dir
    records = run_experiment(spec, profiles)
    emit_csv(records, args.out)
    print(json.dumps({"out": args.out, "records": len(records)}))
    return 0


def build_parser() -> _TrackingParser:
    parser = _TrackingParser(prog="uwchirp", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--sf", type=int, default=8, help="spreading factor (6-10)")
        p.add_argument("--bw", type=float, default=6000.0, help="bandwidth Hz")
        p.add_argument("--os", type=int, default=2, help="oversampling factor")
        p.add_argument("--kind", choices=CHIRP_KINDS, default="quadratic")
        p.add_argument("--seed", type=int, default=1234,
                       help="RNG seed (randomness is never time-derived)")
        p.add_argument("--config", help="key = value file; flags override")
        p.add_argument("--verbose", action="store_true",
                       help="print the fully resolved configuration to stderr")

    p_mod = sub.add_parser("modulate", help="bits -> IQ frame file")
    add_common(p_mod)
    p_mod.add_argument("--payload", help="bit-packed payload file")
    p_mod.add_argument("--random", type=int, help="generate this many random bits")
    p_mod.add_argument("--encode", choices=SCHEMES + ("none",), default="nb_ldpc")
    p_mod.add_argument("--preambles", type=int, default=8)
    p_mod.add_argument("--sfd", type=int, default=2)
    p_mod.add_argument("--save-payload", dest="save_payload",
                       help="also write the (generated) info bits, packed")
    p_mod.add_argument("--out", required=True)
    p_mod.set_defaults(func=cmd_modulate)

    p_ch = sub.add_parser("channel", help="apply multipath + AWGN to an IQ file")
    add_common(p_ch)
    p_ch.add_argument("input")
    p_ch.add_argument("--profile", help="channel profile JSON")
    p_ch.add_argument("--paths", type=int, help="random profile: path count")
    p_ch.add_argument("--max-delay", type=int, dest="max_delay",
                      help="random profile: max delay (samples)")
    p_ch.add_argument("--snr", type=float, help="target SNR dB (default noiseless)")
    p_ch.add_argument("--out", required=True)
    p_ch.set_defaults(func=cmd_channel)

    p_dem = sub.add_parser("demod", help="IQ file -> detected paths + bits")
    add_common(p_dem)
    p_dem.add_argument("input")
    p_dem.add_argument("--mode", choices=("merge", "nomerge"), default="merge")
    p_dem.add_argument("--n-payload", type=int, dest="n_payload", default=100)
    p_dem.add_argument("--preambles", type=int, default=8)
    p_dem.add_argument("--sfd", type=int, default=2)
    p_dem.add_argument("--decode", choices=SCHEMES + ("none",), default="nb_ldpc")
    p_dem.add_argument("--info-bits", type=int, dest="info_bits", default=400)
    p_dem.add_argument("--llr-scale", type=float, dest="llr_scale",
                       default=DEFAULT_LLR_SCALE)
    p_dem.add_argument("--truth", help="bit-packed reference payload file")
    p_dem.set_defaults(func=cmd_demod)

    p_exp = sub.add_parser("experiment", help="run a Monte-Carlo study -> CSV")
    add_common(p_exp)
    p_exp.add_argument("--exp", choices=EXPERIMENTS, required=True)
    p_exp.add_argument("--trials", type=int, default=0,
                       help="trials per sweep point (0 = experiment default)")
    p_exp.add_argument("--snr-list", dest="snr_list",
                       help="comma list of SNR dB values")
    p_exp.add_argument("--paths", help="comma list of path counts (collision)")
    p_exp.add_argument("--kinds", help="comma list of chirp kinds")
    p_exp.add_argument("--schemes", help="comma list of codec schemes")
    p_exp.add_argument("--modes", help="comma list of receiver modes")
    p_exp.add_argument("--paper-scale", action="store_true", dest="paper_scale",
                       help="run the full 100-packets-per-profile scale")
    p_exp.add_argument("--llr-scale", type=float, dest="llr_scale",
                       default=DEFAULT_LLR_SCALE)
    p_exp.add_argument("--profile-dir", dest="profile_dir",
                       help="override stored profiles (also: UWCHIRP_PROFILE_DIR)")
    p_exp.add_argument("--workers", type=int, default=1)
    p_exp.add_argument("--out", required=True)
    p_exp.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _apply_config_file(args, parser)
    _print_resolved(args)
    try:
        return args.func(args, parser)
    except (DetectionError, TruncatedFrameError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except UwChirpError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
