import json
import subprocess
import sys

import numpy as np
import pytest

from fwtmark.cli import main
from fwtmark.harness import read_report
from fwtmark.image import RasterImage, load_image, save_image
from fwtmark.samples import qr_like


@pytest.fixture
def files(tmp_path, camera, qr):
    save_image(camera, tmp_path / "a.png")
    save_image(qr, tmp_path / "qr.png")
    return tmp_path


def run(*argv):
    return main([str(a) for a in argv])


def embedded(files, *extra):
    code = run("embed", "--host", files / "a.png", "--watermark", files / "qr.png",
               "--out", files / "wm.png", *extra)
    assert code == 0
    return files / "wm.png"


def test_embed_happy_path(files, capsys):
    embedded(files, "--alpha", 25, "--level", 2, "--wavelet", "db3")
    assert load_image(files / "wm.png").shape == (512, 512)
    out = capsys.readouterr()
    assert "PSNR=" in out.out and "resolved" not in out.err


def test_resolved_defaults_are_printed(files, capsys):
    embedded(files)
    assert "resolved: alpha=25 level=2 wavelet=db3" in capsys.readouterr().err


def test_extract_reports_zero_ber(files, capsys):
    embedded(files, "--alpha", 25, "--level", 2)
    capsys.readouterr()
    code = run("extract", "--host", files / "a.png", "--input", files / "wm.png", "--wm-size", "64x64",
               "--reference", files / "qr.png", "--out", files / "rec.png", "--alpha", 25, "--level", 2)
    assert code == 0
    line = capsys.readouterr().out
    assert line.startswith("BER=0.0000 NCC=1.0000")
    assert np.array_equal(load_image(files / "rec.png").pixels, load_image(files / "qr.png").pixels)


def test_extract_json_round_trips_through_report_reader(files, capsys):
    embedded(files)
    capsys.readouterr()
    code = run("extract", "--host", files / "a.png", "--input", files / "wm.png", "--wm-size", "64x64",
               "--reference", files / "qr.png", "--json")
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["ber"] == 0.0 and payload["tiles_scored"] == 4
    assert payload["best_tile"] in ([0, 0], [0, 1], [1, 0], [1, 1])
    (files / "row.json").write_text(json.dumps(payload))
    (row,) = read_report(files / "row.json")
    assert row.ber == 0.0 and row.level == 2


def test_embed_json(files, capsys):
    embedded(files, "--json")
    payload = json.loads(capsys.readouterr().out)
    assert payload["alpha"] == 25.0 and payload["psnr_db"] > 34
    (files / "row.json").write_text(json.dumps(payload))
    assert read_report(files / "row.json")[0].wavelet == "db3"


def test_extract_without_reference_uses_consensus(files, capsys):
    embedded(files)
    capsys.readouterr()
    assert run("extract", "--host", files / "a.png", "--input", files / "wm.png", "--wm-size", "64x64") == 0
    assert "consensus of 4 tiles" in capsys.readouterr().out


def test_attack_then_realigned_extract(files, capsys):
    embedded(files)
    assert run("attack", "--input", files / "wm.png", "--out", files / "rot.png",
               "--type", "rotate", "--param", "theta=30") == 0
    assert load_image(files / "rot.png").shape == (700, 700)
    capsys.readouterr()
    assert run("extract", "--host", files / "a.png", "--input", files / "rot.png", "--wm-size", "64x64",
               "--reference", files / "qr.png", "--realign", "rotate:30", "--json") == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["ber"] < 0.08 and payload["attack"] == "kind=rotate,theta=30,seed=0"


def test_rotated_input_without_realign(files, capsys):
    embedded(files)
    run("attack", "--input", files / "wm.png", "--out", files / "rot.png", "--type", "rotate")
    code = run("extract", "--host", files / "a.png", "--input", files / "rot.png", "--wm-size", "64x64")
    assert code == 4
    assert "realign required" in capsys.readouterr().err


def test_attack_seeded_jpeg_output(files, capsys):
    assert run("attack", "--input", files / "a.png", "--out", files / "n1.png",
               "--type", "gaussian", "--param", "sigma=5", "--seed", 3) == 0
    run("attack", "--input", files / "a.png", "--out", files / "n2.png",
        "--type", "gaussian", "--param", "sigma=5", "--seed", 3)
    assert load_image(files / "n1.png") == load_image(files / "n2.png")
    assert run("attack", "--input", files / "a.png", "--out", files / "j.jpg", "--type", "jpeg",
               "--param", "q=30", "--json") == 0
    assert "kind=jpeg,q=30" in capsys.readouterr().out.split("wrote")[-1]


def test_too_large_watermark(files, capsys):
    save_image(RasterImage(np.zeros((200, 200), np.uint8)), files / "big.png")
    code = run("embed", "--host", files / "a.png", "--watermark", files / "big.png", "--out", files / "o.png")
    assert code == 4
    assert "watermark too large" in capsys.readouterr().err
    assert not (files / "o.png").exists()


@pytest.mark.parametrize(
    "argv",
    [
        ["embed", "--host", "a.png", "--watermark", "qr.png", "--out", "o.png", "--alpha", "-3"],
        ["embed", "--host", "a.png", "--watermark", "qr.png", "--out", "o.png", "--level", "0"],
        ["embed", "--host", "a.png", "--watermark", "qr.png", "--out", "o.png", "--wavelet", "haar"],
        ["embed", "--host", "a.png", "--watermark", "qr.png", "--out", "o.png", "--bogus"],
        ["embed", "--host", "a.png", "--watermark", "qr.png", "--out", "o.jpg"],
        ["extract", "--host", "a.png", "--input", "a.png", "--wm-size", "64"],
        ["extract", "--host", "a.png", "--input", "a.png", "--wm-size", "64x64", "--realign", "crop:3"],
        ["attack", "--input", "a.png", "--out", "o.png", "--type", "median", "--param", "k=4"],
        ["attack", "--input", "a.png", "--out", "o.png", "--type", "jpeg", "--param", "sigma=2"],
        ["attack", "--input", "a.png", "--out", "o.png", "--type", "jpeg", "--param", "q"],
        ["attack", "--input", "a.png", "--out", "o.png", "--type", "blur"],
        ["bench", "--host", "synthetic:64x64", "--watermark", "qr:16", "--iterations", "2"],
        [],
    ],
)
def test_usage_errors(files, argv, monkeypatch):
    monkeypatch.chdir(files)
    assert main(argv) == 2
    assert not (files / "o.png").exists() and not (files / "o.jpg").exists()


def test_io_errors(files, capsys):
    code = run("embed", "--host", files / "missing.png", "--watermark", files / "qr.png", "--out", files / "o.png")
    assert code == 3
    (files / "junk.png").write_bytes(b"nope")
    assert run("attack", "--input", files / "junk.png", "--out", files / "o.png", "--type", "jpeg") == 3
    assert run("attack", "--input", files / "a.png", "--out", files / "o.gif", "--type", "jpeg") == 3


def test_evaluate(files, capsys):
    save_image(qr_like(32), files / "qr32.png")
    config = {
        "hosts": [str(files / "a.png"), "synthetic:256x256:5"],
        "watermarks": [str(files / "qr32.png")],
        "attacks": {"jpeg": [70, 30]},
        "seeds": [0, 1],
    }
    (files / "sweep.json").write_text(json.dumps(config))
    assert run("evaluate", "--config", files / "sweep.json", "--out-dir", files / "out") == 0
    assert "10 rows (0 failed)" in capsys.readouterr().out
    rows = read_report(files / "out" / "report.csv")
    assert len(rows) == 10 and rows[0].ber == 0.0
    assert run("evaluate", "--config", files / "sweep.json", "--out-dir", files / "base", "--base-only") == 0
    assert len(read_report(files / "base" / "report.json")) == 2


def test_bench_json(capsys):
    assert run("bench", "--host", "synthetic:256x256", "--watermark", "qr:32", "--iterations", 3, "--json") == 0
    d = json.loads(capsys.readouterr().out)
    assert d["iterations"] == 3 and d["embed_throughput_mpps"] > 0


def test_help_lists_defaults():
    proc = subprocess.run([sys.executable, "-m", "fwtmark", "embed", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "default: db3" in proc.stdout and "default: 128" in proc.stdout
