"""Configuration-driven experiment harness.

Experiments are described by an INI-style text file (or built
programmatically): one waveform section, one scenario section per channel
configuration, SNR grids and work counts.  ``run_sweep`` evaluates every
(scenario, snr) point of the requested mode(s), attaches the diversity
metric where it is defined, and writes a delimiter-separated results file
atomically.

Determinism: every (scenario, mode, snr) point owns a fixed RNG stream
derived from the experiment seed, and every chunk of work inside a point
owns a fixed counter block of that stream.  Results are reduced in
canonical chunk order, so reruns are byte-identical for any worker count.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .ber import (BerPoint, SweepResult, _chunk_sizes, _semi_point,
                  diversity_metric, full_stack_chunk, semi_analytic_chunk,
                  snr_db_to_noise_var, wilson_half_width)
from .channel import ChannelConfig, RepeaterSpec
from .constellation import make_constellation
from .exceptions import ConfigError
from .numerics import SeededRng
from .waveform import WaveformConfig

__all__ = [
    "SnrGrid",
    "Counts",
    "PAPER_COUNTS",
    "DESK_COUNTS",
    "ExperimentConfig",
    "ResultRow",
    "ResultsFile",
    "parse_and_validate",
    "run_sweep",
    "emit_curves",
    "read_results",
    "table1_config",
]

FULL_FRAMES_CHUNK = 2000


@dataclass(frozen=True)
class SnrGrid:
    """Inclusive dB grid start:step:stop."""

    start: float
    step: float
    stop: float

    def __post_init__(self):
        for name in ("start", "step", "stop"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.step <= 0:
            raise ConfigError(f"grid step must be > 0, got {self.step}")
        if self.stop < self.start:
            raise ConfigError(f"empty grid {self.start}:{self.step}:{self.stop}")

    def values(self) -> list[float]:
        n = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return [self.start + k * self.step for k in range(n)]

    @classmethod
    def parse(cls, text: str) -> "SnrGrid":
        parts = text.replace(" ", "").split(":")
        if len(parts) != 3:
            raise ConfigError(f"SNR grid must be start:step:stop, got {text!r}")
        return cls(*map(float, parts))


@dataclass(frozen=True)
class Counts:
    """Work counts per SNR point."""

    full_frames_per_snr: int = 100_000
    semi_channels_per_snr: int = 1_000_000
    semi_interf_samples: int = 50
    semi_chunk: int = 700

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if value < 1:
                raise ConfigError(f"count {name} must be >= 1, got {value}")


DESK_COUNTS = Counts()
PAPER_COUNTS = Counts(full_frames_per_snr=100_000, semi_channels_per_snr=30_000_000,
                      semi_interf_samples=1000, semi_chunk=700)


@dataclass(frozen=True)
class ExperimentConfig:
    waveform: WaveformConfig
    scenarios: tuple[tuple[str, ChannelConfig], ...]
    constellation: str = "qpsk"
    snr_grid_semi: SnrGrid = SnrGrid(0, 1, 45)
    snr_grid_full: SnrGrid = SnrGrid(0, 1, 25)
    counts: Counts = field(default_factory=Counts)
    seed: int = 1
    output_dir: str = "results"

    def __post_init__(self):
        object.__setattr__(self, "scenarios", tuple(self.scenarios))
        if not self.scenarios:
            raise ConfigError("experiment needs at least one scenario")
        names = [name for name, _ in self.scenarios]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate scenario names: {names}")
        make_constellation(self.constellation)
        for name, ch in self.scenarios:
            if ch.n_fft != self.waveform.n_fft or ch.cp_len != self.waveform.cp_len:
                raise ConfigError(f"scenario {name!r}: channel sizes "
                                  f"(N={ch.n_fft}, CP={ch.cp_len}) do not match the waveform "
                                  f"(N={self.waveform.n_fft}, CP={self.waveform.cp_len})")

    def digest(self) -> str:
        blob = json.dumps(_config_dict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _config_dict(cfg: ExperimentConfig) -> dict:
    wf = cfg.waveform
    return {
        "waveform": [wf.n_fft, wf.m_alloc, wf.cp_len, wf.alloc_start],
        "scenarios": [
            [name, ch.l_d, ch.fading,
             [[r.l_ur, r.l_rg, r.delay, r.gain] for r in ch.repeaters]]
            for name, ch in cfg.scenarios
        ],
        "constellation": cfg.constellation,
        "snr_semi": [cfg.snr_grid_semi.start, cfg.snr_grid_semi.step, cfg.snr_grid_semi.stop],
        "snr_full": [cfg.snr_grid_full.start, cfg.snr_grid_full.step, cfg.snr_grid_full.stop],
        "counts": [cfg.counts.full_frames_per_snr, cfg.counts.semi_channels_per_snr,
                   cfg.counts.semi_interf_samples, cfg.counts.semi_chunk],
        "seed": cfg.seed,
    }


# ---------------------------------------------------------------------------
# Config file parsing

def _parse_repeaters(text: str, l_ur: int, l_rg: int) -> tuple[RepeaterSpec, ...]:
    reps = []
    text = text.strip()
    if not text:
        return ()
    for item in text.split(","):
        parts = item.strip().split(":")
        if len(parts) != 2:
            raise ConfigError(f"repeater entry must be delay:gain, got {item.strip()!r}")
        delay_txt, gain = parts[0], float(parts[1])
        delay = float(delay_txt)
        if not delay.is_integer():
            raise ConfigError(f"repeater delay must be an integer sample count, got {delay_txt}")
        reps.append(RepeaterSpec(l_ur=l_ur, l_rg=l_rg, delay=int(delay), gain=gain))
    return tuple(reps)


def parse_and_validate(path) -> ExperimentConfig:
    """Load and fully validate an experiment description file.

    Raises ConfigError for a missing file, malformed syntax, an unknown
    constellation, or any scenario whose channel support does not fit the
    cyclic prefix (the error names the scenario and the offending delay).
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc

    try:
        wf_sec = parser["waveform"] if parser.has_section("waveform") else {}
        waveform = WaveformConfig(
            n_fft=int(wf_sec.get("n_fft", 128)),
            m_alloc=int(wf_sec.get("m_alloc", 72)),
            cp_len=int(wf_sec.get("cp_len", 32)),
            alloc_start=int(wf_sec.get("alloc_start", 0)),
        )

        exp = parser["experiment"] if parser.has_section("experiment") else {}
        cnt = parser["counts"] if parser.has_section("counts") else {}
        counts = Counts(
            full_frames_per_snr=int(cnt.get("full_frames_per_snr",
                                            DESK_COUNTS.full_frames_per_snr)),
            semi_channels_per_snr=int(cnt.get("semi_channels_per_snr",
                                              DESK_COUNTS.semi_channels_per_snr)),
            semi_interf_samples=int(cnt.get("semi_interf_samples",
                                            DESK_COUNTS.semi_interf_samples)),
            semi_chunk=int(cnt.get("semi_chunk", DESK_COUNTS.semi_chunk)),
        )

        scenarios = []
        for section in parser.sections():
            if not section.startswith("scenario:"):
                continue
            name = section.split(":", 1)[1].strip()
            sec = parser[section]
            l_ur = int(sec.get("l_ur", 6))
            l_rg = int(sec.get("l_rg", 6))
            try:
                channel = ChannelConfig(
                    l_d=int(sec.get("l_d", 4)),
                    repeaters=_parse_repeaters(sec.get("repeaters", ""), l_ur, l_rg),
                    n_fft=waveform.n_fft,
                    cp_len=waveform.cp_len,
                    fading=sec.get("fading", "rayleigh"),
                )
            except ConfigError as exc:
                raise ConfigError(f"scenario {name!r}: {exc}") from exc
            scenarios.append((name, channel))

        return ExperimentConfig(
            waveform=waveform,
            scenarios=tuple(scenarios),
            constellation=exp.get("constellation", "qpsk"),
            snr_grid_semi=SnrGrid.parse(exp.get("snr_grid_semi", "0:1:45")),
            snr_grid_full=SnrGrid.parse(exp.get("snr_grid_full", "0:1:25")),
            counts=counts,
            seed=int(exp.get("seed", 1)),
            output_dir=exp.get("output_dir", "results"),
        )
    except ConfigError:
        raise
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc


def table1_config(paper_scale: bool = False, seed: int = 1,
                  output_dir: str = "results") -> ExperimentConfig:
    """The bundled three-scenario experiment (direct, one and two repeaters,
    equal-power Rayleigh taps, N=128 / M=72 / CP=32, QPSK)."""
    rep1 = RepeaterSpec(l_ur=6, l_rg=6, delay=8, gain=1.0)
    rep2 = RepeaterSpec(l_ur=6, l_rg=6, delay=14, gain=1.0)
    mk = lambda reps: ChannelConfig(l_d=4, repeaters=reps, n_fft=128, cp_len=32)
    return ExperimentConfig(
        waveform=WaveformConfig(n_fft=128, m_alloc=72, cp_len=32),
        scenarios=(
            ("direct", mk(())),
            ("one-repeater", mk((rep1,))),
            ("two-repeater", mk((rep1, rep2))),
        ),
        counts=PAPER_COUNTS if paper_scale else DESK_COUNTS,
        seed=seed,
        output_dir=output_dir,
    )


# ---------------------------------------------------------------------------
# Sweep execution

@dataclass(frozen=True)
class ResultRow:
    scenario: str
    mode: str
    snr_db: float
    ber: float
    n_effective: int
    half_width: float
    diversity: float | None


@dataclass(frozen=True)
class ResultsFile:
    config_digest: str
    seed: int
    version: str
    rows: tuple[ResultRow, ...]

    def format(self) -> str:
        lines = [f"# replink v{self.version} config={self.config_digest} seed={self.seed}",
                 "scenario\tmode\tsnr_db\tber\tn_effective\thalf_width\tdiversity"]
        for r in self.rows:
            div = "" if r.diversity is None else f"{r.diversity:.9g}"
            lines.append(f"{r.scenario}\t{r.mode}\t{r.snr_db:.9g}\t{r.ber:.9g}"
                         f"\t{r.n_effective}\t{r.half_width:.9g}\t{div}")
        return "\n".join(lines) + "\n"

    def sweep(self, scenario: str, mode: str) -> SweepResult:
        """One scenario's points in one mode, as a sweep object."""
        points = tuple(BerPoint(r.snr_db, r.ber, r.n_effective, r.half_width)
                       for r in self.rows
                       if (r.scenario, r.mode) == (scenario, mode))
        if not points:
            raise KeyError(f"no rows for scenario {scenario!r} in mode {mode!r}")
        return SweepResult(scenario=scenario, mode=mode, points=points,
                           config_digest=self.config_digest, seed=self.seed)

    def write(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as handle:
                handle.write(self.format())
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        return path


def read_results(path) -> ResultsFile:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"results file not found: {path}")
    lines = path.read_text().splitlines()
    if len(lines) < 2 or not lines[0].startswith("# replink v"):
        raise ConfigError(f"not a results file: {path}")
    meta = dict(item.split("=", 1) for item in lines[0].split() if "=" in item)
    rows = []
    for line in lines[2:]:
        if not line.strip():
            continue
        scenario, mode, snr, ber, n_eff, half, div = line.split("\t")
        rows.append(ResultRow(scenario, mode, float(snr), float(ber), int(n_eff),
                              float(half), float(div) if div else None))
    return ResultsFile(config_digest=meta.get("config", ""),
                       seed=int(meta.get("seed", 0)),
                       version=lines[0].split()[2].lstrip("v"),
                       rows=tuple(rows))


def _point_stream(scenario_idx: int, mode: str, snr_idx: int) -> int:
    mode_bit = 1 if mode == "semi" else 0
    return (((scenario_idx << 1) | mode_bit) << 12) | snr_idx


def _semi_task(args):
    (ch_cfg, wf_cfg, name, noise_var, size, n_interf, seed, stream, block) = args
    gen = SeededRng(seed, stream).generator(block=block)
    return semi_analytic_chunk(ch_cfg, wf_cfg, make_constellation(name),
                               noise_var, size, n_interf, gen)


def _full_task(args):
    (ch_cfg, wf_cfg, name, noise_var, size, seed, stream, block) = args
    gen = SeededRng(seed, stream).generator(block=block)
    return full_stack_chunk(ch_cfg, wf_cfg, make_constellation(name),
                            noise_var, size, gen)


def _reduce_semi(snr_db, chunk_results, n_channels, n_interf) -> BerPoint:
    sums = [r[0] for r in chunk_results]
    sumsqs = [r[1] for r in chunk_results]
    return _semi_point(snr_db, sums, sumsqs, n_channels, n_interf)


def _reduce_full(snr_db, chunk_results) -> BerPoint:
    errors = math.fsum(r[0] for r in chunk_results)
    bits = sum(r[1] for r in chunk_results)
    return BerPoint(snr_db=snr_db, ber=errors / bits, n_effective=bits,
                    half_width=wilson_half_width(errors, bits))


def run_sweep(cfg: ExperimentConfig, mode: str = "both", workers: int = 1,
              write: bool = True) -> ResultsFile:
    """Evaluate every (scenario, snr) point of the requested mode(s).

    Chunks of work are dispatched to ``workers`` processes (1 = run
    in-process) and reduced in canonical order, so the output is identical
    for every worker count.  The results file is written atomically to
    ``cfg.output_dir/results.tsv`` unless ``write`` is False.
    """
    if mode not in ("semi", "full", "both"):
        raise ConfigError(f"mode must be semi, full or both, got {mode!r}")
    modes = ("full", "semi") if mode == "both" else (mode,)
    spec_name = cfg.constellation
    counts = cfg.counts

    # (point key, reducer info, [task args]) in canonical order
    points = []
    for scenario_idx, (scenario, ch_cfg) in enumerate(cfg.scenarios):
        for run_mode in modes:
            grid = cfg.snr_grid_semi if run_mode == "semi" else cfg.snr_grid_full
            for snr_idx, snr_db in enumerate(grid.values()):
                stream = _point_stream(scenario_idx, run_mode, snr_idx)
                noise_var = snr_db_to_noise_var(snr_db)
                if run_mode == "semi":
                    sizes = _chunk_sizes(counts.semi_channels_per_snr, counts.semi_chunk)
                    tasks = [(ch_cfg, cfg.waveform, spec_name, noise_var, size,
                              counts.semi_interf_samples, cfg.seed, stream, block)
                             for block, size in enumerate(sizes)]
                else:
                    sizes = _chunk_sizes(counts.full_frames_per_snr, FULL_FRAMES_CHUNK)
                    tasks = [(ch_cfg, cfg.waveform, spec_name, noise_var, size,
                              cfg.seed, stream, block)
                             for block, size in enumerate(sizes)]
                points.append((scenario, run_mode, snr_db, tasks))

    chunk_results = _execute(points, workers)

    rows = []
    for (scenario, run_mode, snr_db, tasks), results in zip(points, chunk_results):
        if run_mode == "semi":
            point = _reduce_semi(snr_db, results, counts.semi_channels_per_snr,
                                 counts.semi_interf_samples)
        else:
            point = _reduce_full(snr_db, results)
        diversity = None
        if snr_db > 0 and 0.0 < point.ber < 1.0:
            diversity = diversity_metric(point.ber, snr_db)
        rows.append(ResultRow(scenario, run_mode, snr_db, point.ber,
                              point.n_effective, point.half_width, diversity))
    rows.sort(key=lambda r: (r.scenario, r.mode, r.snr_db))

    result = ResultsFile(config_digest=cfg.digest(), seed=cfg.seed,
                         version=__version__, rows=tuple(rows))
    if write:
        result.write(Path(cfg.output_dir) / "results.tsv")
    return result


def _execute(points, workers: int):
    """Run all chunk tasks, returning per-point result lists in task order.

    A failing chunk surfaces as a RuntimeError naming its work unit."""
    runner = {"semi": _semi_task, "full": _full_task}

    def unit(idx, k):
        scenario, run_mode, snr_db, _ = points[idx]
        return f"{scenario}/{run_mode}@{snr_db:g}dB chunk {k}"

    if workers <= 1:
        results = []
        for idx, (_, run_mode, _, tasks) in enumerate(points):
            row = []
            for k, args in enumerate(tasks):
                try:
                    row.append(runner[run_mode](args))
                except Exception as exc:
                    raise RuntimeError(f"work unit {unit(idx, k)} failed: {exc}") from exc
            results.append(row)
        return results

    flat = [(idx, run_mode, args)
            for idx, (_, run_mode, _, tasks) in enumerate(points)
            for args in tasks]
    results = [[None] * len(tasks) for _, _, _, tasks in points]
    slots = [(idx, k) for idx, (_, _, _, tasks) in enumerate(points)
             for k in range(len(tasks))]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        values = pool.map(_dispatch, flat, chunksize=max(1, len(flat) // (8 * workers)))
        for idx, k in slots:
            try:
                results[idx][k] = next(values)
            except Exception as exc:
                raise RuntimeError(f"work unit {unit(idx, k)} failed: {exc}") from exc
    return results


def _dispatch(item):
    _, run_mode, args = item
    return _semi_task(args) if run_mode == "semi" else _full_task(args)


# ---------------------------------------------------------------------------
# Curve emission

def emit_curves(results: ResultsFile, kind: str, out_dir) -> list[Path]:
    """Write per-scenario plain-text curve tables.

    kind="ber": one file per (scenario, mode) with rows (snr_db, ber,
    half_width).  kind="diversity": one file per scenario from the
    semi-analytic rows only, value = diversity metric and half_width the
    first-order propagation of the BER half-width; rows at snr <= 0 (where
    the metric is undefined) are omitted.
    """
    if kind not in ("ber", "diversity"):
        raise ConfigError(f"unknown curve kind {kind!r}")
    if not results.rows:
        raise ConfigError("results file has no rows")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    if kind == "ber":
        groups = sorted({(r.scenario, r.mode) for r in results.rows})
        for scenario, mode in groups:
            rows = [r for r in results.rows if (r.scenario, r.mode) == (scenario, mode)]
            lines = ["# snr_db\tber\thalf_width"]
            lines += [f"{r.snr_db:.9g}\t{r.ber:.9g}\t{r.half_width:.9g}" for r in rows]
            written.append(_write_text(out_dir / f"ber_{scenario}_{mode}.dat", lines))
        return written

    scenarios = sorted({r.scenario for r in results.rows if r.mode == "semi"})
    if not scenarios:
        raise ConfigError("diversity curves need semi-analytic rows")
    for scenario in scenarios:
        rows = [r for r in results.rows
                if r.scenario == scenario and r.mode == "semi" and r.diversity is not None]
        lines = ["# snr_db\tdiversity\thalf_width"]
        for r in rows:
            gamma_log = math.log(10.0 ** (r.snr_db / 10.0))
            half = r.half_width / (r.ber * gamma_log) if r.ber > 0 else 0.0
            lines.append(f"{r.snr_db:.9g}\t{r.diversity:.9g}\t{half:.9g}")
        written.append(_write_text(out_dir / f"diversity_{scenario}.dat", lines))
    return written


def _write_text(path: Path, lines: list[str]) -> Path:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    with os.fdopen(fd, "w") as handle:
        handle.write("\n".join(lines) + "\n")
    os.replace(tmp, path)
    return path
