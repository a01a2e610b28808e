"""Experiment harness: per-level and lambda-threshold LOOCV runs for the
FD, energy and co-occurrence best-basis methods on a labeled PGM corpus.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .best_basis import (
    MAX_LEVEL,
    Criterion,
    FeatureMode,
    FeatureVector,
    search,
    select_best_basis,
)
from .classifier import ClassificationReport, as_arrays, loocv
from .features import glcm_signature
from .image_core import ImageRecord, fbm_descriptor, read_pgm_file, synth_fbm, write_pgm_file
from .wavelet import QUADRANTS

log = logging.getLogger(__name__)

METHODS = ("BBS_FD", "BBS_E", "BBS_CM")
_CRITERION = {"BBS_FD": Criterion.FD, "BBS_E": Criterion.ENERGY, "BBS_CM": Criterion.ENERGY}

PADDING_NOTE = (
    "variable-depth vectors are padded to the run's maximum depth by repeating the last "
    "included level (level 1 when depth is 0) and a trailing depth feature is appended"
)


class ConfigError(ValueError):
    """Invalid manifest or run configuration."""


class BenchError(RuntimeError):
    """A per-image failure, tagged with the offending source."""


@dataclass(frozen=True)
class RunConfig:
    manifest: str = ""
    methods: tuple = METHODS
    max_level: int = 4
    lam: float = 0.012
    mode: str = FeatureMode.SELECTED.value
    noise_cutoff: float | None = None
    glcm_levels: int = 16
    glcm_distance: int = 1
    fd_max_distance: int | None = None
    seed: int = 0
    output: str = "bench_out"
    workers: int = 1

    def validate(self) -> "RunConfig":
        if not self.manifest:
            raise ConfigError("manifest path is required")
        bad = [m for m in self.methods if m not in METHODS]
        if bad or not self.methods:
            raise ConfigError(f"unknown methods {bad}; choose from {METHODS}")
        if not 1 <= self.max_level <= MAX_LEVEL:
            raise ConfigError(f"max_level must be in 1..{MAX_LEVEL}")
        if self.lam < 0:
            raise ConfigError("lambda must be >= 0")
        try:
            FeatureMode(self.mode)
        except ValueError:
            raise ConfigError(f"mode must be 'selected' or 'all', got {self.mode!r}") from None
        if not 2 <= self.glcm_levels <= 256 or self.glcm_distance < 1:
            raise ConfigError("glcm_levels must be in 2..256 and glcm_distance >= 1")
        if self.fd_max_distance is not None and self.fd_max_distance < 2:
            raise ConfigError("fd_max_distance must be >= 2")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        return self

    def echo(self, method: str) -> dict:
        return {
            "method": method,
            "criterion": _CRITERION[method].value,
            "lambda": self.lam,
            "mode": self.mode,
            "max_level": self.max_level,
            "noise_cutoff": self.noise_cutoff if _CRITERION[method] is Criterion.FD else None,
            "glcm_levels": self.glcm_levels,
            "glcm_distance": self.glcm_distance,
            "fd_max_distance": self.fd_max_distance,
            "seed": self.seed,
            "version": __version__,
        }


_CONFIG_KEYS = {
    "manifest": str,
    "methods": lambda v: tuple(s.strip() for s in v.split(",") if s.strip()),
    "method": lambda v: tuple(s.strip() for s in v.split(",") if s.strip()),
    "max_level": int,
    "lambda": float,
    "mode": str,
    "noise_cutoff": lambda v: None if v.lower() in ("", "none", "off") else float(v),
    "glcm_levels": int,
    "glcm_distance": int,
    "fd_max_distance": lambda v: None if v.lower() in ("", "none", "auto") else int(v),
    "seed": int,
    "output": str,
    "workers": int,
}
_FIELD_FOR_KEY = {"lambda": "lam", "method": "methods"}


def parse_config(text: str, base_dir=None) -> RunConfig:
    """Parse ``key = value`` lines; relative paths resolve against `base_dir`."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"config line {lineno}: unknown key {key!r}")
        try:
            values[_FIELD_FOR_KEY.get(key, key)] = _CONFIG_KEYS[key](value)
        except ValueError as exc:
            raise ConfigError(f"config line {lineno}: bad value for {key}: {exc}") from None
    if base_dir is not None:
        for k in ("manifest", "output"):
            if k in values and not Path(values[k]).is_absolute():
                values[k] = str(Path(base_dir) / values[k])
    return RunConfig(**values).validate()


# ----------------------------------------------------------------------------
# manifests and datasets
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class ManifestEntry:
    path: Path
    label: str
    source: str


def parse_manifest(text: str, base_dir=".") -> list[ManifestEntry]:
    """Read ``path,label[,source]`` lines; ``#`` starts a comment."""
    entries = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) not in (2, 3) or not parts[0] or not parts[1]:
            raise ConfigError(f"manifest line {lineno}: expected 'path,label'")
        path = Path(parts[0])
        if not path.is_absolute():
            path = Path(base_dir) / path
        source = parts[2] if len(parts) == 3 and parts[2] else parts[0]
        entries.append(ManifestEntry(path, parts[1], source))
    return entries


def read_manifest(path, min_classes: int = 2, min_per_class: int = 4) -> list[ManifestEntry]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read manifest {path}: {exc}") from None
    entries = parse_manifest(text, path.parent)
    if not entries:
        raise ConfigError(f"manifest {path} lists no images")
    counts: dict = {}
    for e in entries:
        counts[e.label] = counts.get(e.label, 0) + 1
    if len(counts) < min_classes:
        raise ConfigError(f"manifest {path} has {len(counts)} class(es), need >= {min_classes}")
    thin = sorted(c for c, n in counts.items() if n < min_per_class)
    if thin:
        raise ConfigError(f"manifest {path}: classes {thin} have fewer than {min_per_class} images")
    return entries


def load_record(entry: ManifestEntry) -> ImageRecord:
    try:
        img = read_pgm_file(entry.path)
    except (OSError, ValueError) as exc:
        raise BenchError(f"{entry.path}: {exc}") from exc
    return ImageRecord(img, entry.label, entry.source)


# ----------------------------------------------------------------------------
# per-image feature blocks
# ----------------------------------------------------------------------------

@dataclass
class ImageFeatures:
    """All per-level signature blocks of one image along its lambda = 0 path."""

    label: str
    source: str
    levels: list            # LevelScores per computed level
    blocks: list            # per level, tuple of feature values
    suffixes: tuple         # names of one block, without the level prefix
    seconds: float = 0.0

    def fixed(self, depth: int) -> FeatureVector:
        values, names = [], []
        for j in range(depth):
            values.extend(self.blocks[j])
            names.extend(f"L{j + 1}_{s}" for s in self.suffixes)
        return FeatureVector(tuple(values), tuple(names), self.label, self.source)

    def threshold_depth(self, lam: float, noise_cutoff: float | None) -> int:
        """Depth the lambda / cutoff rules would stop at along the same path."""
        table = {ls.level: ls.scores for ls in self.levels}
        _, _, depth = search(lambda level, path: table[level], len(self.levels), lam, noise_cutoff)
        return depth

    def padded(self, depth: int, width: int) -> FeatureVector:
        last = self.blocks[max(depth, 1) - 1]
        values, names = [], []
        for j in range(max(width, 1)):
            block = self.blocks[j] if j < depth else last
            values.extend(block)
            names.extend(f"L{j + 1}_{s}" for s in self.suffixes)
        values.append(float(depth))
        names.append("depth")
        return FeatureVector(tuple(values), tuple(names), self.label, self.source)


def image_features(record: ImageRecord, method: str, cfg: RunConfig) -> ImageFeatures:
    """Run the method's best-basis search to cfg.max_level with lambda = 0."""
    start = time.perf_counter()
    mode = FeatureMode(cfg.mode)
    criterion = _CRITERION[method]
    try:
        trace = select_best_basis(
            record.image, criterion, cfg.max_level, 0.0, None,
            fd_max_distance=cfg.fd_max_distance, keep_subbands=(method == "BBS_CM"),
        )
        quads = QUADRANTS if mode is FeatureMode.ALL_FOUR else None
        if method == "BBS_CM":
            names = ("glcm_corr", "glcm_entropy", "glcm_energy")
            blocks = []
            for ls, sub in zip(trace.levels, trace.subbands):
                chosen = quads or (ls.selected,)
                block = []
                for q in chosen:
                    block.extend(glcm_signature(sub.band(q), cfg.glcm_levels, cfg.glcm_distance).as_tuple())
                blocks.append(tuple(block))
            suffixes = tuple(f"{q}_{n}" for q in (quads or ("sel",)) for n in names)
        else:
            blocks = [tuple(ls.scores[q] for q in (quads or (ls.selected,))) for ls in trace.levels]
            suffixes = tuple(f"{q}_{criterion.value}" for q in (quads or ("sel",)))
    except Exception as exc:
        raise BenchError(f"{record.source}: {type(exc).__name__}: {exc}") from exc
    return ImageFeatures(record.label, record.source, list(trace.levels), blocks, suffixes,
                         time.perf_counter() - start)


def _job(args):
    entry, method, cfg = args
    return image_features(load_record(entry), method, cfg)


def dataset_features(entries, method: str, cfg: RunConfig) -> list[ImageFeatures]:
    """Features for every manifest entry, in manifest order."""
    jobs = [(e, method, cfg) for e in entries]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(_job, jobs, chunksize=max(1, len(jobs) // (4 * cfg.workers))))
    return [_job(j) for j in jobs]


def noise_cutoff_for(method: str, cfg: RunConfig) -> float | None:
    """The cutoff is an FD threshold; energy-guided methods never use it."""
    return cfg.noise_cutoff if _CRITERION[method] is Criterion.FD else None


def threshold_vectors(feats: list[ImageFeatures], lam: float, noise_cutoff: float | None):
    depths = [f.threshold_depth(lam, noise_cutoff) for f in feats]
    width = max(depths)
    return [f.padded(d, width) for f, d in zip(feats, depths)], depths


# ----------------------------------------------------------------------------
# CSV / report I/O
# ----------------------------------------------------------------------------

def features_csv(vectors) -> str:
    vectors = list(vectors)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(vectors[0].names) + ["label", "source"])
    for v in vectors:
        if tuple(v.names) != tuple(vectors[0].names):
            raise ValueError(f"feature names of {v.source} differ from the first row")
        w.writerow([repr(float(x)) for x in v.values] + [v.label, v.source])
    return buf.getvalue()


def read_features_csv(text: str) -> list[FeatureVector]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise ConfigError("feature CSV is empty")
    header = rows[0]
    if "label" not in header:
        raise ConfigError("feature CSV has no 'label' column")
    li = header.index("label")
    si = header.index("source") if "source" in header else None
    fcols = [i for i, h in enumerate(header) if i not in (li, si)]
    if not fcols:
        raise ConfigError("feature CSV has no feature columns")
    out = []
    for n, row in enumerate(rows[1:], 2):
        if not row:
            continue
        if len(row) != len(header):
            raise ConfigError(f"feature CSV line {n}: {len(row)} fields, header has {len(header)}")
        try:
            values = tuple(float(row[i]) for i in fcols)
        except ValueError as exc:
            raise ConfigError(f"feature CSV line {n}: {exc}") from None
        out.append(FeatureVector(values, tuple(header[i] for i in fcols), row[li],
                                 row[si] if si is not None else ""))
    if not out:
        raise ConfigError("feature CSV has no data rows")
    return out


def check_report(rep: ClassificationReport) -> None:
    """Assert a report's arithmetic invariants."""
    conf = rep.confusion
    assert conf.sum() == rep.n_samples == len(rep.predictions)
    assert np.allclose(rep.per_class_accuracy, np.diag(conf) / conf.sum(axis=1))
    assert rep.overall_accuracy == np.trace(conf) / conf.sum()


# ----------------------------------------------------------------------------
# the benchmark
# ----------------------------------------------------------------------------

@dataclass
class MethodResult:
    method: str
    per_level: dict               # level -> ClassificationReport
    threshold: ClassificationReport
    threshold_depths: list
    seconds: float = 0.0

    @property
    def best_level(self) -> int:
        # earliest level wins ties
        return max(self.per_level, key=lambda L: (self.per_level[L].overall_accuracy, -L))

    def accuracy_table(self) -> str:
        classes = self.per_level[1].classes
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["level"] + list(classes) + ["overall"])
        for L in sorted(self.per_level):
            rep = self.per_level[L]
            w.writerow([L] + [f"{a:.6f}" for a in rep.per_class_accuracy] + [f"{rep.overall_accuracy:.6f}"])
        return buf.getvalue()


@dataclass
class BenchResult:
    config: RunConfig
    methods: dict = field(default_factory=dict)   # method -> MethodResult

    def summary(self) -> dict:
        return {
            "config": {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(self.config).items()
                       if k not in ("output", "workers", "manifest")},
            "padding": PADDING_NOTE,
            "methods": {
                m: {
                    "best_level": r.best_level,
                    "best_overall_accuracy": r.per_level[r.best_level].overall_accuracy,
                    "per_level_overall": {str(L): r.per_level[L].overall_accuracy for L in sorted(r.per_level)},
                    "threshold_overall_accuracy": r.threshold.overall_accuracy,
                    "threshold_mean_depth": float(np.mean(r.threshold_depths)),
                    "threshold_depth_counts": {str(d): int(c) for d, c in
                                               zip(*np.unique(r.threshold_depths, return_counts=True))},
                }
                for m, r in self.methods.items()
            },
        }


def run_method(entries, method: str, cfg: RunConfig, out: Path | None = None) -> MethodResult:
    start = time.perf_counter()
    feats = dataset_features(entries, method, cfg)
    per_level = {}
    for L in range(1, cfg.max_level + 1):
        vectors = [f.fixed(L) for f in feats]
        X, y, names = as_arrays(vectors)
        rep = loocv(X, y, names)
        check_report(rep)
        per_level[L] = rep
        if out is not None:
            echo = cfg.echo(method) | {"level": L, "lambda": 0.0}
            (out / f"report_{method}_L{L}.json").write_text(rep.to_json(echo))
    vectors, depths = threshold_vectors(feats, cfg.lam, noise_cutoff_for(method, cfg))
    X, y, names = as_arrays(vectors)
    thr = loocv(X, y, names)
    check_report(thr)
    result = MethodResult(method, per_level, thr, depths, time.perf_counter() - start)
    if out is not None:
        (out / f"features_{method}.csv").write_text(features_csv(f.fixed(cfg.max_level) for f in feats))
        (out / f"features_{method}_lambda.csv").write_text(features_csv(vectors))
        echo = cfg.echo(method) | {"padding": PADDING_NOTE}
        (out / f"report_{method}_lambda.json").write_text(thr.to_json(echo))
        (out / f"accuracy_vs_level_{method}.csv").write_text(result.accuracy_table())
    log.info("%s: best level %d (%.4f), lambda run %.4f, %.2fs", method, result.best_level,
             per_level[result.best_level].overall_accuracy, thr.overall_accuracy, result.seconds)
    return result


def run_bench(cfg: RunConfig, write: bool = True) -> BenchResult:
    """Per-level fixed-depth runs plus one lambda run for each configured method.

    Wall-clock timings are logged and kept on the result but never written,
    so output files are byte-identical across reruns.
    """
    cfg.validate()
    entries = read_manifest(cfg.manifest)
    out = None
    if write:
        out = Path(cfg.output)
        out.mkdir(parents=True, exist_ok=True)
    result = BenchResult(cfg)
    for method in cfg.methods:
        result.methods[method] = run_method(entries, method, cfg, out)
    if out is not None:
        (out / "summary.json").write_text(json.dumps(result.summary(), indent=2, sort_keys=True) + "\n")
    return result


def extract_vectors(entries, method: str, cfg: RunConfig, depth: int | None = None) -> list[FeatureVector]:
    """Feature vectors for `extract`: fixed depth when lambda is 0, else padded."""
    feats = dataset_features(entries, method, cfg)
    cutoff = noise_cutoff_for(method, cfg)
    if cfg.lam == 0 and cutoff is None:
        return [f.fixed(depth or cfg.max_level) for f in feats]
    vectors, _ = threshold_vectors(feats, cfg.lam, cutoff)
    return vectors


def class_name(hurst: float) -> str:
    return f"H{hurst:g}"


def synth_dataset(out, hursts, per_class: int, size: int, seed: int) -> Path:
    """Write a labeled fBm PGM corpus plus ``manifest.txt`` under `out`.

    Per-image seeds derive from ``(seed, class index, image index)`` so the
    corpus is a pure function of the arguments.
    """
    if per_class < 1 or size < 8:
        raise ConfigError("per_class must be >= 1 and size >= 8")
    if not hursts:
        raise ConfigError("at least one Hurst value is required")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    lines = [f"# fBm corpus: H={','.join(f'{h:g}' for h in hursts)} per_class={per_class} "
             f"size={size} seed={seed}"]
    for ci, h in enumerate(hursts):
        label = class_name(h)
        for i in range(per_class):
            s = int(np.random.SeedSequence([seed, ci, i]).generate_state(1)[0])
            name = f"{label}_{i:03d}.pgm"
            write_pgm_file(out / name, synth_fbm(size, size, h, s))
            lines.append(f"{name},{label},{fbm_descriptor(h, s, size, size)}")
    manifest = out / "manifest.txt"
    manifest.write_text("\n".join(lines) + "\n")
    return manifest
