"""Single-path tree-structured wavelet packet search.

At every level the current node is analyzed into four subbands, each subband
is scored, and the search descends into the highest-scoring one.  The search
stops when the four scores are nearly equal (spread <= lambda), when all four
look like noise (every score >= a cutoff), or at the depth cap.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .features import subband_energy
from .fractal import estimate_fd
from .wavelet import QUADRANTS, FilterPair, analyze_level, db8_filters

MAX_LEVEL = 8
DEFAULT_NOISE_CUTOFF = 2.985


class Criterion(str, enum.Enum):
    FD = "fd"
    ENERGY = "energy"


class Termination(str, enum.Enum):
    THRESHOLD = "ThresholdReached"
    NOISE = "NoiseCutoff"
    MAX_DEPTH = "MaxDepth"


class FeatureMode(str, enum.Enum):
    SELECTED = "selected"
    ALL_FOUR = "all"


@dataclass(frozen=True)
class LevelScores:
    level: int
    scores: Mapping[str, float]
    selected: str
    spread: float

    @classmethod
    def from_scores(cls, level: int, scores: Mapping[str, float]) -> "LevelScores":
        ordered = {q: float(scores[q]) for q in QUADRANTS}
        best = QUADRANTS[0]
        for q in QUADRANTS[1:]:
            if ordered[q] > ordered[best]:
                best = q
        values = list(ordered.values())
        return cls(level, ordered, best, max(values) - min(values))


@dataclass
class DecompositionTrace:
    levels: list
    termination: Termination
    depth: int
    criterion: str = Criterion.FD.value
    # SubbandSet per computed level, kept only on request
    subbands: list = field(default_factory=list, repr=False)

    @property
    def path(self) -> list:
        return [ls.selected for ls in self.levels]

    def included(self) -> list:
        return self.levels[: self.depth]

    def truncated(self, depth: int) -> "DecompositionTrace":
        """The trace a lambda = 0 search capped at `depth` would produce."""
        if not 1 <= depth <= len(self.levels):
            raise ValueError(f"cannot truncate a {len(self.levels)}-level trace to depth {depth}")
        return DecompositionTrace(
            self.levels[:depth], Termination.MAX_DEPTH, depth, self.criterion, self.subbands[:depth]
        )

    def report(self) -> str:
        """Line-oriented text report: one line per computed level."""
        lines = [f"# criterion={self.criterion} termination={self.termination.value} depth={self.depth}"]
        for ls in self.levels:
            scores = " ".join(f"{q}={ls.scores[q]:.6f}" for q in QUADRANTS)
            flag = "in" if ls.level <= self.depth else "out"
            lines.append(f"level={ls.level} {scores} selected={ls.selected} spread={ls.spread:.6f} {flag}")
        lines.append(f"termination={self.termination.value}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class FeatureVector:
    values: tuple
    names: tuple
    label: str = ""
    source: str = ""

    def __post_init__(self):
        if len(self.values) != len(self.names):
            raise ValueError("feature values and names differ in length")
        if not all(np.isfinite(v) for v in self.values):
            raise ValueError(f"non-finite feature value in {self.source or 'vector'}")

    def __len__(self):
        return len(self.values)


def search(score_level: Callable[[int, tuple], Mapping[str, float]], max_level: int,
           lam: float = 0.0, noise_cutoff: float | None = None) -> tuple[list, Termination, int]:
    """Run the termination logic over an arbitrary level scorer.

    `score_level(level, path)` returns the four quadrant scores at `level`
    for the node reached by `path`.  A lambda of zero disables the threshold
    rule, so ``depth == max_level`` unless the noise cutoff fires.
    """
    if not 1 <= max_level <= MAX_LEVEL:
        raise ValueError(f"max_level must be in 1..{MAX_LEVEL}, got {max_level}")
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    levels: list = []
    path: tuple = ()
    for level in range(1, max_level + 1):
        ls = LevelScores.from_scores(level, score_level(level, path))
        levels.append(ls)
        if lam > 0 and ls.spread <= lam:
            return levels, Termination.THRESHOLD, level - 1
        if noise_cutoff is not None and min(ls.scores.values()) >= noise_cutoff:
            return levels, Termination.NOISE, level - 1
        path = path + (ls.selected,)
    return levels, Termination.MAX_DEPTH, max_level


def make_scorer(criterion, fd_max_distance: int | None = None) -> Callable[[np.ndarray], float]:
    criterion = Criterion(criterion)
    if criterion is Criterion.ENERGY:
        return subband_energy
    return lambda band: estimate_fd(band, fd_max_distance).fd


def select_best_basis(img, criterion=Criterion.FD, max_level: int = 3, lam: float = 0.0,
                      noise_cutoff: float | None = None, filters: FilterPair | None = None,
                      fd_max_distance: int | None = None, keep_subbands: bool = False,
                      scorer: Callable[[np.ndarray], float] | None = None) -> DecompositionTrace:
    """Best-basis search on an image.

    Parameters
    ----------
    criterion : Criterion or str
        ``"fd"`` (maximal fractal dimension) or ``"energy"``.
    lam : float
        Spread threshold; zero disables it.
    noise_cutoff : float, optional
        Stop once every subband score reaches this value.
    fd_max_distance : int, optional
        Passed to `estimate_fd`; defaults to its size rule.
    keep_subbands : bool
        Keep each computed level's SubbandSet on the trace (needed by the
        co-occurrence baseline).
    scorer : callable, optional
        Override the criterion's subband scorer.
    """
    filters = filters or db8_filters()
    criterion = Criterion(criterion)
    score = scorer or make_scorer(criterion, fd_max_distance)
    node = {(): np.asarray(img, dtype=np.float64)}
    kept: list = []

    def score_level(level, path):
        sub = analyze_level(node.pop(path), filters, level, path)
        if keep_subbands:
            kept.append(sub)
        bands = sub.bands()
        node.clear()
        node.update({path + (q,): band for q, band in bands.items()})
        return {q: score(band) for q, band in bands.items()}

    levels, term, depth = search(score_level, max_level, lam, noise_cutoff)
    return DecompositionTrace(levels, term, depth, criterion.value, kept)


def trace_from_table(table, max_level: int, lam: float = 0.0, noise_cutoff: float | None = None,
                     criterion=Criterion.FD) -> DecompositionTrace:
    """Search over precomputed per-level scores, ignoring the path.

    `table[level - 1]` is a mapping or 4-sequence in LL, LH, HL, HH order.
    """
    def score_level(level, path):
        row = table[level - 1]
        return row if isinstance(row, Mapping) else dict(zip(QUADRANTS, row))

    levels, term, depth = search(score_level, max_level, lam, noise_cutoff)
    return DecompositionTrace(levels, term, depth, Criterion(criterion).value)


def extract_feature_vector(trace: DecompositionTrace, mode=FeatureMode.SELECTED,
                           label: str = "", source: str = "") -> FeatureVector:
    """Assemble the feature vector from the levels that count toward depth.

    SelectedOnly yields one value per level named ``L<j>_sel_<criterion>``
    (the quadrant varies per image, so names stay positional); AllFour yields
    ``L<j>_<Q>_<criterion>`` for each quadrant.
    """
    mode = FeatureMode(mode)
    if trace.depth < 1:
        raise ValueError("trace has depth 0: no level qualifies for the feature vector")
    values, names = [], []
    for ls in trace.included():
        if mode is FeatureMode.SELECTED:
            values.append(ls.scores[ls.selected])
            names.append(f"L{ls.level}_sel_{trace.criterion}")
        else:
            for q in QUADRANTS:
                values.append(ls.scores[q])
                names.append(f"L{ls.level}_{q}_{trace.criterion}")
    return FeatureVector(tuple(values), tuple(names), label, source)
