"""Batch evaluation, attack sweeps and timing benchmarks.

A sweep config is a JSON object::

    {
      "hosts": ["images/airplane.png", "synthetic:512x512:3"],
      "watermarks": ["qr.png", "qr:64"],
      "configs": [{"alpha": 25, "level": 2, "wavelet": "db3"}],
      "attacks": {"gaussian": [0.5, 5, 10], "jpeg": [70, 30]},
      "seeds": [0, 1, 2],
      "output_dir": "results"
    }

``configs`` entries may omit any of ``alpha``/``level``/``wavelet``/``threshold``;
missing values are resolved per host and watermark. ``attacks`` may also be a
list of ``"kind=jpeg,q=70"`` strings. Image sources are file paths or the
generators ``synthetic:HxW[:seed]``, ``qr:SIZE[:seed]`` and ``logo:SIZE``.
"""

from __future__ import annotations

import csv
import json
import math
import os
import platform
import resource
import statistics
import sys
import time
import tracemalloc
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import samples
from .attacks import AttackSpec, attack_and_realign
from .errors import ParameterError, WatermarkError
from .image import RasterImage, load_image
from .pipeline import default_config_for, embed, extract
from .qim import EmbedConfig
from .wavelet import WaveletSpec, fwt2, ifwt2


@dataclass
class EvalRow:
    host_id: str
    watermark_id: str
    alpha: float
    level: int
    wavelet: str
    attack: str
    seed: int
    psnr_db: float
    ssim: float
    ber: float
    ncc: float
    embed_seconds: float
    extract_seconds: float
    throughput_mpps: float
    peak_memory_bytes: int
    error: str = ""


FIELDS = tuple(f.name for f in fields(EvalRow))
TIMING_FIELDS = ("embed_seconds", "extract_seconds", "throughput_mpps", "peak_memory_bytes")
_FLOAT_FIELDS = {"alpha", "psnr_db", "ssim", "ber", "ncc", "embed_seconds", "extract_seconds", "throughput_mpps"}
_INT_FIELDS = {"level", "seed", "peak_memory_bytes"}


@dataclass
class SweepConfig:
    hosts: list[str]
    watermarks: list[str]
    configs: list[dict] = field(default_factory=lambda: [{}])
    attacks: list[tuple[str, float]] = field(default_factory=list)
    seeds: list[int] = field(default_factory=lambda: [0])
    output_dir: str | None = None

    @classmethod
    def from_dict(cls, raw: dict) -> "SweepConfig":
        unknown = set(raw) - {"hosts", "watermarks", "configs", "attacks", "seeds", "output_dir"}
        if unknown:
            raise ParameterError(f"unknown sweep config keys: {', '.join(sorted(unknown))}")
        attacks = _parse_attack_grid(raw.get("attacks", []))
        seeds = raw.get("seeds", [0])
        if isinstance(seeds, int):
            seeds = list(range(seeds))
        configs = raw.get("configs") or [{}]
        for c in configs:
            extra = set(c) - {"alpha", "level", "wavelet", "threshold"}
            if extra:
                raise ParameterError(f"unknown embed config keys: {', '.join(sorted(extra))}")
        return cls(
            hosts=list(raw.get("hosts", [])),
            watermarks=list(raw.get("watermarks", [])),
            configs=[dict(c) for c in configs],
            attacks=attacks,
            seeds=[int(s) for s in seeds],
            output_dir=raw.get("output_dir"),
        )

    @classmethod
    def load(cls, path: str | os.PathLike) -> "SweepConfig":
        with open(path) as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParameterError(f"{path}: invalid JSON sweep config ({exc})") from exc
        return cls.from_dict(raw)

    def expected_rows(self, with_attacks: bool = True) -> int:
        per_group = len(self.attacks) * len(self.seeds) + 1 if with_attacks else 1
        return len(self.hosts) * len(self.watermarks) * len(self.configs) * per_group


def _parse_attack_grid(grid) -> list[tuple[str, float]]:
    cells = []
    if isinstance(grid, dict):
        for kind, values in grid.items():
            for v in values if isinstance(values, list) else [values]:
                spec = AttackSpec(kind, v)
                cells.append((spec.kind, spec.value))
    else:
        for item in grid:
            spec = AttackSpec.parse(item) if isinstance(item, str) else AttackSpec.from_fields(item)
            cells.append((spec.kind, spec.value))
    return cells


def load_source(source: str) -> RasterImage:
    """Load an image path or build one of the synthetic generators."""
    kind, _, rest = source.partition(":")
    try:
        if kind == "synthetic" and rest:
            dims, _, seed = rest.partition(":")
            h, w = (int(v) for v in dims.lower().split("x"))
            return samples.synthetic_host(h, w, int(seed or 0))
        if kind == "qr" and rest:
            size, _, seed = rest.partition(":")
            return samples.qr_like(int(size), seed=int(seed or 0))
        if kind == "logo" and rest:
            return samples.gray_logo(int(rest))
    except ValueError:
        raise ParameterError(f"bad image source {source!r}") from None
    return load_image(source)


def source_id(source: str) -> str:
    if source.split(":", 1)[0] in ("synthetic", "qr", "logo") and ":" in source:
        return source
    return Path(source).stem


def _resolve(host: RasterImage, wm: RasterImage, partial: dict) -> EmbedConfig:
    return default_config_for(host, wm, **partial)


def _nan_row(host_src, wm_src, partial, attack, seed, error) -> EvalRow:
    return EvalRow(
        source_id(host_src), source_id(wm_src),
        float(partial.get("alpha", math.nan)), int(partial.get("level", 0)),
        str(partial.get("wavelet", "")), attack, seed,
        math.nan, math.nan, math.nan, math.nan, math.nan, math.nan, math.nan, 0, error,
    )


def _traced(fn, *args, **kwargs):
    tracemalloc.start()
    try:
        out = fn(*args, **kwargs)
        peak = tracemalloc.get_traced_memory()[1]
    finally:
        tracemalloc.stop()
    return out, peak


_WARM = False


def warm_up() -> None:
    """Load the compiled transform kernels once so the first timed row doesn't pay for it."""
    global _WARM
    if not _WARM:
        ifwt2(fwt2(np.zeros((8, 8)), WaveletSpec("db1", 1)))
        _WARM = True


def _evaluate_group(job) -> list[EvalRow]:
    host_src, wm_src, partial, attacks, seeds = job
    warm_up()
    n_rows = 1 + len(attacks) * len(seeds)
    try:
        host = load_source(host_src)
        wm = load_source(wm_src)
        cfg = _resolve(host, wm, partial)
        emb, emb_peak = _traced(embed, host, wm, cfg)
        base_ex, ex_peak = _traced(extract, host, emb.watermarked, cfg, wm.shape, wm)
    except WatermarkError as exc:
        row = _nan_row(host_src, wm_src, partial, "none", 0, str(exc))
        rows = [row]
        for kind, value in attacks:
            for seed in seeds:
                rows.append(_nan_row(host_src, wm_src, partial, str(AttackSpec(kind, value, seed)), seed, str(exc)))
        assert len(rows) == n_rows
        return rows

    megapixels = host.width * host.height / 1e6
    common = dict(
        host_id=source_id(host_src), watermark_id=source_id(wm_src),
        alpha=cfg.alpha, level=cfg.spec.level, wavelet=cfg.spec.family,
        psnr_db=emb.psnr_db, ssim=emb.ssim, embed_seconds=emb.embed_seconds,
        throughput_mpps=megapixels / emb.embed_seconds if emb.embed_seconds > 0 else math.inf,
    )
    rows = [EvalRow(
        attack="none", seed=0, ber=base_ex.ber, ncc=base_ex.ncc,
        extract_seconds=base_ex.extract_seconds, peak_memory_bytes=max(emb_peak, ex_peak), **common,
    )]
    for kind, value in attacks:
        for seed in seeds:
            spec = AttackSpec(kind, value, seed)
            try:
                attacked = attack_and_realign(spec, emb.watermarked)
                ex, peak = _traced(extract, host, attacked, cfg, wm.shape, wm)
                rows.append(EvalRow(
                    attack=str(spec), seed=seed, ber=ex.ber, ncc=ex.ncc,
                    extract_seconds=ex.extract_seconds, peak_memory_bytes=max(emb_peak, peak), **common,
                ))
            except WatermarkError as exc:
                row = _nan_row(host_src, wm_src, partial, str(spec), seed, str(exc))
                rows.append(row)
    return rows


def _jobs(cfg: SweepConfig, with_attacks: bool):
    attacks = cfg.attacks if with_attacks else []
    for host in cfg.hosts:
        for wm in cfg.watermarks:
            for partial in cfg.configs:
                yield host, wm, partial, attacks, cfg.seeds


def _run(cfg: SweepConfig, with_attacks: bool, jobs: int) -> list[EvalRow]:
    work = list(_jobs(cfg, with_attacks))
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            groups = list(pool.map(_evaluate_group, work))
    else:
        groups = [_evaluate_group(w) for w in work]
    return [row for group in groups for row in group]


def run_base_eval(cfg: SweepConfig, jobs: int = 1) -> list[EvalRow]:
    """One unattacked row per host x watermark x config."""
    return _run(cfg, False, jobs)


def run_attack_sweep(cfg: SweepConfig, jobs: int = 1) -> list[EvalRow]:
    """Baseline plus one row per attack cell and seed, for every host x watermark x config."""
    return _run(cfg, True, jobs)


# -- reports ---------------------------------------------------------------

def _cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(rows: list[EvalRow], path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(FIELDS)
        for row in rows:
            writer.writerow([_cell(getattr(row, name)) for name in FIELDS])


def write_json(rows: list[EvalRow], path: str | os.PathLike) -> None:
    with open(path, "w") as fh:
        json.dump([asdict(r) for r in rows], fh, indent=1)
        fh.write("\n")


def _coerce(name: str, value):
    if name in _FLOAT_FIELDS:
        return float(value)
    if name in _INT_FIELDS:
        return int(value)
    return "" if value is None else str(value)


def row_from_dict(d: dict) -> EvalRow:
    missing = set(FIELDS) - set(d) - {"error"}
    if missing:
        raise ParameterError(f"report row missing {', '.join(sorted(missing))}")
    return EvalRow(**{name: _coerce(name, d.get(name, "")) for name in FIELDS})


def read_report(path: str | os.PathLike) -> list[EvalRow]:
    """Read rows back from a CSV or JSON report (by extension)."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        with open(path) as fh:
            data = json.load(fh)
        if isinstance(data, dict):
            data = [data]
        return [row_from_dict(d) for d in data]
    with open(path, newline="") as fh:
        return [row_from_dict(d) for d in csv.DictReader(fh)]


def metric_columns(rows: list[EvalRow]) -> list[tuple]:
    """Rows with timing and memory columns dropped, for reproducibility checks."""
    keep = [n for n in FIELDS if n not in TIMING_FIELDS]
    return [tuple(_cell(getattr(r, n)) for n in keep) for r in rows]


def system_info() -> dict:
    cpu = platform.processor() or ""
    try:
        with open("/proc/cpuinfo") as fh:
            for line in fh:
                if line.startswith("model name"):
                    cpu = line.split(":", 1)[1].strip()
                    break
    except OSError:
        pass
    return {
        "os": platform.platform(),
        "cpu": cpu,
        "cpu_count": os.cpu_count(),
        "python": platform.python_version(),
        "numpy": np.__version__,
    }


def write_reports(rows: list[EvalRow], output_dir: str | os.PathLike, stem: str = "report") -> dict:
    """Write ``<stem>.csv``, ``<stem>.json`` and ``<stem>.meta.json`` into ``output_dir``."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "csv": out / f"{stem}.csv",
        "json": out / f"{stem}.json",
        "meta": out / f"{stem}.meta.json",
    }
    write_csv(rows, paths["csv"])
    write_json(rows, paths["json"])
    with open(paths["meta"], "w") as fh:
        json.dump({"system": system_info(), "rows": len(rows)}, fh, indent=1)
        fh.write("\n")
    return paths


# -- benchmark -------------------------------------------------------------

@dataclass
class BenchmarkSummary:
    megapixels: float
    embed_samples: list[float]
    extract_samples: list[float]
    peak_rss_bytes: int
    config: EmbedConfig

    @staticmethod
    def _stats(samples: list[float]) -> dict:
        return {
            "min": min(samples),
            "median": statistics.median(samples),
            "mean": statistics.fmean(samples),
            "max": max(samples),
        }

    @property
    def embed(self) -> dict:
        return self._stats(self.embed_samples)

    @property
    def extract(self) -> dict:
        return self._stats(self.extract_samples)

    @property
    def embed_throughput_mpps(self) -> float:
        return self.megapixels / self.embed["median"]

    @property
    def extract_throughput_mpps(self) -> float:
        return self.megapixels / self.extract["median"]

    def as_dict(self) -> dict:
        return {
            "megapixels": self.megapixels,
            "alpha": self.config.alpha,
            "level": self.config.spec.level,
            "wavelet": self.config.spec.family,
            "iterations": len(self.embed_samples),
            "embed_seconds": self.embed,
            "extract_seconds": self.extract,
            "embed_throughput_mpps": self.embed_throughput_mpps,
            "extract_throughput_mpps": self.extract_throughput_mpps,
            "peak_rss_bytes": self.peak_rss_bytes,
            "embed_samples": self.embed_samples,
            "extract_samples": self.extract_samples,
        }


def peak_rss_bytes() -> int:
    """Peak resident set size of this process so far (best effort)."""
    usage = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    return int(usage if sys.platform == "darwin" else usage * 1024)


def benchmark(host: RasterImage, watermark: RasterImage, cfg: EmbedConfig, iterations: int = 5) -> BenchmarkSummary:
    """Time ``iterations`` embed and extract runs after one untimed warm-up."""
    if iterations < 3:
        raise ParameterError(f"benchmark needs at least 3 iterations, got {iterations}")
    marked = embed(host, watermark, cfg, measure=False).watermarked
    extract(host, marked, cfg, watermark.shape, watermark)

    embed_times, extract_times = [], []
    for _ in range(iterations):
        start = time.perf_counter()
        marked = embed(host, watermark, cfg, measure=False).watermarked
        embed_times.append(time.perf_counter() - start)
        start = time.perf_counter()
        extract(host, marked, cfg, watermark.shape, watermark)
        extract_times.append(time.perf_counter() - start)
    return BenchmarkSummary(host.width * host.height / 1e6, embed_times, extract_times, peak_rss_bytes(), cfg)
