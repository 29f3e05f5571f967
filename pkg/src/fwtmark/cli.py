"""Command-line interface: ``fwtmark {embed,extract,attack,evaluate,bench}``.

Exit codes: 0 success, 2 bad arguments, 3 I/O failure, 4 size/capacity/dimension
constraint violated.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path

from . import harness
from .attacks import KINDS, PARAMETERS, AttackSpec, apply, realign
from .errors import ConstraintError, ImageIOError, ParameterError, WatermarkError
from .image import check_format, load_image, save_image
from .metrics import psnr, ssim
from .pipeline import default_config_for, embed, extract, resolve_defaults
from .qim import MAX_WATERMARK_SIDE
from .wavelet import FAMILIES

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_CONSTRAINT = 0, 2, 3, 4
LOSSLESS = (".png", ".bmp")


class UsageError(Exception):
    pass


def _dims(text: str) -> tuple[int, int]:
    """Parse ``WxH`` into ``(height, width)``."""
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WIDTHxHEIGHT, got {text!r}") from None
    if w < 1 or h < 1:
        raise argparse.ArgumentTypeError(f"dimensions must be positive, got {text!r}")
    return h, w


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0 or not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return v


def _level(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"level must be >= 1, got {v}")
    return v


def _threshold(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 1 <= v <= 255:
        raise argparse.ArgumentTypeError(f"threshold must be in [1, 255], got {v}")
    return v


def _realign(text: str) -> AttackSpec:
    kind, _, theta = text.partition(":")
    if kind != "rotate" or not theta:
        raise argparse.ArgumentTypeError(f"expected rotate:THETA, got {text!r}")
    try:
        return AttackSpec("rotate", float(theta))
    except (ValueError, ParameterError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_embed_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=_positive_float, default=None,
                   help="quantization step (default: auto, 25 for binary / 30 for grayscale watermarks at level 2)")
    p.add_argument("--level", type=_level, default=None,
                   help="wavelet decomposition level (default: auto from host and watermark size)")
    p.add_argument("--wavelet", choices=FAMILIES, default="db3", help="Daubechies wavelet (default: %(default)s)")
    p.add_argument("--threshold", type=_threshold, default=128,
                   help="watermark binarization threshold (default: %(default)s)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fwtmark", description="Wavelet + additive QIM image watermarking toolkit."
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print machine-readable JSON (default: off)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("embed", parents=[common], help="embed a watermark into a host image")
    p.add_argument("--host", required=True, help="host image (PNG/BMP/JPEG)")
    p.add_argument("--watermark", required=True, help=f"watermark image, at most {MAX_WATERMARK_SIDE}x{MAX_WATERMARK_SIDE}")
    p.add_argument("--out", required=True, help="watermarked output, .png or .bmp")
    _add_embed_options(p)

    p = sub.add_parser("extract", parents=[common], help="recover a watermark using the original host")
    p.add_argument("--host", required=True, help="original (unmarked) host image")
    p.add_argument("--input", required=True, help="suspect image")
    p.add_argument("--wm-size", type=_dims, required=True, metavar="WxH", help="watermark size, e.g. 64x64")
    p.add_argument("--reference", default=None, help="reference watermark for BER/NCC (default: none, consensus tile)")
    p.add_argument("--out", default=None, help="write the recovered best tile here (default: not written)")
    p.add_argument("--realign", type=_realign, default=None, metavar="rotate:THETA",
                   help="undo a rotation attack before extraction (default: none)")
    _add_embed_options(p)

    p = sub.add_parser("attack", parents=[common], help="apply one simulated attack")
    p.add_argument("--input", required=True, help="image to attack")
    p.add_argument("--out", required=True, help="attacked output image")
    p.add_argument("--type", required=True, choices=KINDS, help="attack kind")
    p.add_argument("--param", action="append", default=[], metavar="K=V",
                   help="attack parameter: " + ", ".join(f"{k} {n} (default {d})" for k, (n, d) in PARAMETERS.items()))
    p.add_argument("--seed", type=int, default=0, help="RNG seed for gaussian/sandpaper (default: %(default)s)")

    p = sub.add_parser("evaluate", parents=[common], help="run a batch evaluation / attack sweep from a JSON config")
    p.add_argument("--config", required=True, help="sweep config (JSON)")
    p.add_argument("--out-dir", default=None, help="report directory (default: config output_dir or ./results)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default: %(default)s)")
    p.add_argument("--base-only", action="store_true", help="skip attacks, baseline rows only (default: off)")
    p.add_argument("--seed", type=int, default=0, help="seed used when the config lists none (default: %(default)s)")

    p = sub.add_parser("bench", parents=[common], help="time embedding and extraction")
    p.add_argument("--host", required=True, help="host image or synthetic:HxW[:seed]")
    p.add_argument("--watermark", required=True, help="watermark image or qr:SIZE")
    p.add_argument("--iterations", type=int, default=5, help="timed iterations after one warm-up (default: %(default)s)")
    _add_embed_options(p)
    return parser


def _config(args, host, watermark=None, wm_dims=None):
    overrides = {"alpha": args.alpha, "level": args.level, "wavelet": args.wavelet, "threshold": args.threshold}
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if watermark is not None:
        return default_config_for(host, watermark, **overrides)
    return resolve_defaults(host.shape, wm_dims, **overrides)


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, indent=1))
    else:
        print(text)


def _row(**values) -> dict:
    row = dict.fromkeys(harness.FIELDS, math.nan)
    row.update(attack="none", seed=0, error="", peak_memory_bytes=harness.peak_rss_bytes())
    row.update(values)
    return row


def cmd_embed(args) -> int:
    if Path(args.out).suffix.lower() not in LOSSLESS:
        raise UsageError("watermarked output must be lossless (.png or .bmp); use `attack --type jpeg` for JPEG")
    host = load_image(args.host)
    wm = load_image(args.watermark)
    cfg = _config(args, host, watermark=wm)
    if args.alpha is None or args.level is None:
        print(f"resolved: alpha={cfg.alpha:g} level={cfg.spec.level} wavelet={cfg.spec.family}", file=sys.stderr)
    harness.warm_up()
    result = embed(host, wm, cfg)
    save_image(result.watermarked, args.out)
    mp = host.width * host.height / 1e6
    payload = _row(
        host_id=Path(args.host).stem, watermark_id=Path(args.watermark).stem,
        alpha=cfg.alpha, level=cfg.spec.level, wavelet=cfg.spec.family,
        psnr_db=result.psnr_db, ssim=result.ssim, embed_seconds=result.embed_seconds,
        throughput_mpps=mp / result.embed_seconds,
    )
    _emit(args, payload,
          f"wrote {args.out}: PSNR={result.psnr_db:.2f} dB SSIM={result.ssim:.4f} "
          f"time={result.embed_seconds:.3f}s alpha={cfg.alpha:g} level={cfg.spec.level} wavelet={cfg.spec.family}")
    return EXIT_OK


def cmd_extract(args) -> int:
    if args.out and Path(args.out).suffix.lower() not in LOSSLESS:
        raise UsageError("recovered watermark must be written as .png or .bmp")
    host = load_image(args.host)
    suspect = load_image(args.input)
    reference = load_image(args.reference) if args.reference else None
    cfg = _config(args, host, wm_dims=args.wm_size)
    if args.alpha is None or args.level is None:
        print(f"resolved: level={cfg.spec.level} wavelet={cfg.spec.family}", file=sys.stderr)
    attack = "none"
    if args.realign is not None:
        suspect = realign(args.realign, suspect, host.shape)
        attack = str(args.realign)
    harness.warm_up()
    result = extract(host, suspect, cfg, args.wm_size, reference)
    if args.out:
        save_image(result.best_tile.render(), args.out)
    quality = (psnr(host, suspect), ssim(host, suspect)) if min(host.shape) >= 11 else (math.nan, math.nan)
    payload = _row(
        host_id=Path(args.host).stem,
        watermark_id=Path(args.reference).stem if args.reference else "",
        alpha=cfg.alpha, level=cfg.spec.level, wavelet=cfg.spec.family, attack=attack,
        psnr_db=quality[0], ssim=quality[1],
        ber=math.nan if result.ber is None else result.ber,
        ncc=math.nan if result.ncc is None else result.ncc,
        extract_seconds=result.extract_seconds,
    )
    payload["best_tile"] = list(result.tile_report.best_tile_index)
    payload["tiles_scored"] = result.tile_report.tile_count
    if result.ber is None:
        text = f"best tile {result.tile_report.best_tile_index} (consensus of {result.tile_report.tile_count} tiles)"
    else:
        text = f"BER={result.ber:.4f} NCC={result.ncc:.4f} best tile {result.tile_report.best_tile_index}"
    _emit(args, payload, text)
    return EXIT_OK


def cmd_attack(args) -> int:
    fields = {"kind": args.type, "seed": args.seed}
    for item in args.param:
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--param expects K=V, got {item!r}")
        fields[key.strip()] = value.strip()
    spec = AttackSpec.from_fields(fields)
    check_format(args.out)
    img = load_image(args.input)
    out = apply(spec, img)
    save_image(out, args.out)
    _emit(args, {"attack": str(spec), "output": args.out, "width": out.width, "height": out.height},
          f"wrote {args.out} ({spec}) {out.width}x{out.height}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    cfg = harness.SweepConfig.load(args.config)
    with open(args.config) as fh:
        if "seeds" not in json.load(fh):
            cfg.seeds = [args.seed]
    rows = harness.run_base_eval(cfg, args.jobs) if args.base_only else harness.run_attack_sweep(cfg, args.jobs)
    out_dir = args.out_dir or cfg.output_dir or "results"
    paths = harness.write_reports(rows, out_dir)
    failed = sum(1 for r in rows if r.error)
    if args.json:
        print(json.dumps([asdict(r) for r in rows], indent=1))
    else:
        print(f"{len(rows)} rows ({failed} failed) -> {paths['csv']}, {paths['json']}")
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.iterations < 3:
        raise UsageError("--iterations must be >= 3")
    host = harness.load_source(args.host)
    wm = harness.load_source(args.watermark)
    cfg = _config(args, host, watermark=wm)
    summary = harness.benchmark(host, wm, cfg, args.iterations)
    d = summary.as_dict()
    _emit(args, d,
          f"{summary.megapixels:.3f} MP, level {cfg.spec.level}, alpha {cfg.alpha:g}: "
          f"embed median {d['embed_seconds']['median'] * 1e3:.1f} ms ({summary.embed_throughput_mpps:.2f} MP/s), "
          f"extract median {d['extract_seconds']['median'] * 1e3:.1f} ms ({summary.extract_throughput_mpps:.2f} MP/s), "
          f"peak RSS {summary.peak_rss_bytes / 2**20:.0f} MiB")
    return EXIT_OK


COMMANDS = {"embed": cmd_embed, "extract": cmd_extract, "attack": cmd_attack, "evaluate": cmd_evaluate, "bench": cmd_bench}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"fwtmark: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParameterError as exc:
        print(f"fwtmark: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ImageIOError as exc:
        print(f"fwtmark: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"fwtmark: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConstraintError as exc:
        print(f"fwtmark: {exc}", file=sys.stderr)
        return EXIT_CONSTRAINT
    except WatermarkError as exc:
        print(f"fwtmark: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
