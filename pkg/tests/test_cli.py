"""CLI contract: subcommand flows, exit codes, config files."""

import json

import numpy as np
import pytest

from uwchirp.cli import main
from uwchirp.iqio import IqBuffer, write_iq
from uwchirp.chirp import ChirpConfig


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_modulate_random_frame(tmp_path, capsys):
    out = tmp_path / "tx.iq"
    code, stdout, _ = run_cli(
        capsys, "modulate", "--random", "400", "--encode", "nb_ldpc",
        "--sf", "8", "--seed", "5", "--out", str(out),
    )
    assert code == 0
    info = json.loads(stdout)
    assert info["samples"] == 110 * 512
    assert info["n_payload"] == 100


def test_modulate_deterministic_bytes(tmp_path, capsys):
    a, b = tmp_path / "a.iq", tmp_path / "b.iq"
    for p in (a, b):
        code, _, _ = run_cli(
            capsys, "modulate", "--random", "128", "--encode", "none",
            "--seed", "3", "--out", str(p),
        )
        assert code == 0
    assert a.read_bytes() == b.read_bytes()


def test_modulate_sf_out_of_range(tmp_path, capsys):
    code, _, err = run_cli(
        capsys, "modulate", "--sf", "5", "--random", "400",
        "--out", str(tmp_path / "x.iq"),
    )
    assert code == 2


def test_modulate_payload_conflicts_with_random(tmp_path, capsys):
    payload = tmp_path / "p.bin"
    payload.write_bytes(b"\x00" * 50)
    with pytest.raises(SystemExit) as e:
        run_cli(
            capsys, "modulate", "--payload", str(payload), "--random", "400",
            "--out", str(tmp_path / "x.iq"),
        )
    assert e.value.code == 2


def test_channel_identity_roundtrip(tmp_path, capsys):
    tx = tmp_path / "tx.iq"
    run_cli(capsys, "modulate", "--random", "400", "--seed", "1", "--out", str(tx))
    prof = tmp_path / "ident.json"
    prof.write_text(
        '{"taps": [{"delay": 0.0, "gain_re": 1.0, "gain_im": 0.0}], "snr_db": null}\n'
    )
    rx = tmp_path / "rx.iq"
    code, stdout, _ = run_cli(
        capsys, "channel", str(tx), "--profile", str(prof), "--out", str(rx)
    )
    assert code == 0
    from uwchirp.iqio import read_iq

    a, _ = read_iq(tx)
    b, _ = read_iq(rx)
    assert np.array_equal(a.samples, b.samples)
    assert (tmp_path / "rx.iq.profile.json").exists()


def test_channel_seeded_repeatability(tmp_path, capsys):
    tx = tmp_path / "tx.iq"
    run_cli(capsys, "modulate", "--random", "400", "--seed", "1", "--out", str(tx))
    outs = []
    for name in ("r1.iq", "r2.iq"):
        p = tmp_path / name
        code, _, _ = run_cli(
            capsys, "channel", str(tx), "--paths", "3", "--snr", "10",
            "--seed", "7", "--out", str(p),
        )
        assert code == 0
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]


def test_channel_missing_input(tmp_path, capsys):
    code, _, err = run_cli(
        capsys, "channel", str(tmp_path / "nope.iq"), "--out", str(tmp_path / "o.iq")
    )
    assert code == 2


def test_channel_profile_conflicts_with_paths(tmp_path, capsys):
    tx = tmp_path / "tx.iq"
    run_cli(capsys, "modulate", "--random", "400", "--seed", "1", "--out", str(tx))
    with pytest.raises(SystemExit) as e:
        run_cli(
            capsys, "channel", str(tx), "--profile", "p.json", "--paths", "2",
            "--out", str(tmp_path / "o.iq"),
        )
    assert e.value.code == 2


def test_demod_clean_loopback(tmp_path, capsys):
    tx = tmp_path / "tx.iq"
    truth = tmp_path / "truth.bin"
    run_cli(
        capsys, "modulate", "--random", "400", "--seed", "5",
        "--save-payload", str(truth), "--out", str(tx),
    )
    code, stdout, _ = run_cli(
        capsys, "demod", str(tx), "--seed", "5", "--truth", str(truth)
    )
    assert code == 0
    info = json.loads(stdout)
    assert info["bit_errors"] == 0
    assert info["converged"] is True


def test_demod_nomerge_single_path(tmp_path, capsys):
    tx = tmp_path / "tx.iq"
    run_cli(capsys, "modulate", "--random", "400", "--seed", "2", "--out", str(tx))
    code, stdout, _ = run_cli(
        capsys, "demod", str(tx), "--mode", "nomerge", "--seed", "2"
    )
    assert code == 0
    assert len(json.loads(stdout)["paths"]) == 1


def test_demod_detection_failure_exit3(tmp_path, capsys):
    cfg = ChirpConfig()
    rng = np.random.default_rng(0)
    n = 130 * cfg.samples_per_symbol
    noise = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    p = tmp_path / "noise.iq"
    write_iq(p, IqBuffer(noise, cfg.sample_rate_hz), cfg)
    code, _, err = run_cli(capsys, "demod", str(p))
    assert code == 3


def test_experiment_collision_csv_deterministic(tmp_path, capsys):
    outs = []
    for name in ("a.csv", "b.csv"):
        p = tmp_path / name
        code, _, _ = run_cli(
            capsys, "experiment", "--exp", "collision", "--trials", "20",
            "--paths", "1,2", "--seed", "11", "--out", str(p),
        )
        assert code == 0
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]
    header = outs[0].decode().splitlines()[0]
    assert header.startswith("experiment,kind,scheme,mode,n_paths")


def test_experiment_invalid_sweep(tmp_path, capsys):
    with pytest.raises(SystemExit) as e:
        run_cli(
            capsys, "experiment", "--exp", "collision", "--paths", "0",
            "--out", str(tmp_path / "x.csv"),
        )
    assert e.value.code == 2


def test_config_file_supplies_defaults(tmp_path, capsys):
    cfgfile = tmp_path / "mod.cfg"
    cfgfile.write_text("seed = 5\nrandom = 128\nencode = none\n")
    out = tmp_path / "a.iq"
    code, stdout, _ = run_cli(
        capsys, "modulate", "--config", str(cfgfile), "--out", str(out)
    )
    assert code == 0
    assert json.loads(stdout)["n_payload"] == 16

    # explicit flag beats the file
    out2 = tmp_path / "b.iq"
    code, stdout, _ = run_cli(
        capsys, "modulate", "--config", str(cfgfile), "--random", "256",
        "--out", str(out2),
    )
    assert code == 0
    assert json.loads(stdout)["n_payload"] == 32


def test_config_file_unknown_key(tmp_path, capsys):
    cfgfile = tmp_path / "bad.cfg"
    cfgfile.write_text("quantum_mode = on\n")
    with pytest.raises(SystemExit) as e:
        run_cli(capsys, "modulate", "--config", str(cfgfile), "--random", "128",
                "--out", str(tmp_path / "x.iq"))
    assert e.value.code == 2


def test_verbose_prints_resolved_config(tmp_path, capsys):
    code, _, err = run_cli(
        capsys, "modulate", "--random", "128", "--encode", "none",
        "--verbose", "--out", str(tmp_path / "v.iq"),
    )
    assert code == 0
    assert "# seed = 1234" in err
    assert "# sf = 8" in err
