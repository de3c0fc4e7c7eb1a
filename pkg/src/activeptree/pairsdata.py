"""Cause-effect pairs: loading, equiprobable binning and the benchmark protocol.

The expected layout is one whitespace-separated numeric file per pair
(``pairNNNN.txt``) plus a ``pairmeta.txt`` with one line per pair::

    <id> <cause first col> <cause last col> <effect first col> <effect last col> <weight>

Column numbers are 1-based and inclusive.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .simharness import EpisodeConfig, Setup, parameterize_truth, run_experiment, two_variable_hset
from .strategies import StrategyKind

log = logging.getLogger(__name__)


class PairsFormatError(ValueError):
    pass


@dataclass
class PairRecord:
    id: str
    cause: np.ndarray
    effect: np.ndarray
    weight: float


@dataclass
class MetaEntry:
    id: str
    cause_cols: tuple[int, int]
    effect_cols: tuple[int, int]
    weight: float


@dataclass
class BinnedPair:
    id: str
    cause_bins: np.ndarray
    effect_bins: np.ndarray
    K: int
    weight: float
    degenerate: bool = False

    def joint(self) -> np.ndarray:
        """Empirical joint of (cause bin, effect bin)."""
        counts = np.zeros((self.K, self.K))
        np.add.at(counts, (self.cause_bins, self.effect_bins), 1.0)
        return counts / counts.sum()


def parse_meta_line(line: str, source: str = "<meta>", lineno: int = 0) -> MetaEntry:
    parts = line.split()
    if len(parts) != 6:
        raise PairsFormatError(f"{source}:{lineno}: expected 6 fields, got {len(parts)}")
    try:
        c0, c1, e0, e1 = (int(p) for p in parts[1:5])
        w = float(parts[5])
    except ValueError:
        raise PairsFormatError(f"{source}:{lineno}: non-numeric metadata field in {line.strip()!r}") from None
    if min(c0, c1, e0, e1) < 1 or c0 > c1 or e0 > e1:
        raise PairsFormatError(f"{source}:{lineno}: invalid column ranges in {line.strip()!r}")
    if not w > 0:
        raise PairsFormatError(f"{source}:{lineno}: weight must be positive")
    return MetaEntry(parts[0], (c0, c1), (e0, e1), w)


def read_meta(path: str | Path) -> list[MetaEntry]:
    path = Path(path)
    out = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        if line.strip():
            out.append(parse_meta_line(line, str(path), lineno))
    return out


def load_pair(data_path: str | Path, meta: MetaEntry | str) -> PairRecord:
    """Read the first cause column and the first effect column of one pair."""
    data_path = Path(data_path)
    if isinstance(meta, str):
        meta = parse_meta_line(meta)
    need = max(meta.cause_cols[0], meta.effect_cols[0])
    cause, effect = [], []
    for lineno, line in enumerate(data_path.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        cells = line.split()
        if len(cells) < need:
            raise PairsFormatError(f"{data_path}:{lineno}: {len(cells)} columns, need at least {need}")
        try:
            row = [float(c) for c in cells]
        except ValueError:
            raise PairsFormatError(f"{data_path}:{lineno}: non-numeric cell in {line.strip()!r}") from None
        cause.append(row[meta.cause_cols[0] - 1])
        effect.append(row[meta.effect_cols[0] - 1])
    if not cause:
        raise PairsFormatError(f"{data_path}: no data rows")
    return PairRecord(meta.id, np.array(cause), np.array(effect), meta.weight)


def quantile_bin(values, K: int = 5) -> tuple[np.ndarray, bool]:
    """Equal-frequency bins from empirical quantiles.

    Edge ``i`` is the sorted value at rank ``ceil(i * n / K) - 1``; a value
    equal to an edge goes to the lower bin, so equal values always share a
    bin. Returns the bin indices and a flag set when ties leave fewer than
    ``K`` nonempty bins.
    """
    if K < 2:
        raise ValueError("K must be at least 2")
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise ValueError("cannot bin an empty sequence")
    s = np.sort(x, kind="stable")
    n = len(s)
    ranks = np.ceil(np.arange(1, K) * n / K).astype(int) - 1
    edges = s[ranks]
    bins = np.searchsorted(edges, x, side="left")
    degenerate = len(np.unique(bins)) < K
    return bins, bool(degenerate)


def bin_pair(pair: PairRecord, K: int = 5) -> BinnedPair:
    cb, d1 = quantile_bin(pair.cause, K)
    eb, d2 = quantile_bin(pair.effect, K)
    return BinnedPair(pair.id, cb, eb, K, pair.weight, d1 or d2)


def load_pairs(dataset_dir: str | Path, meta_name: str = "pairmeta.txt") -> list[PairRecord]:
    dataset_dir = Path(dataset_dir)
    meta_path = dataset_dir / meta_name
    if not meta_path.exists():
        raise FileNotFoundError(f"metadata file {meta_path} is missing")
    return [load_pair(dataset_dir / f"pair{m.id}.txt", m) for m in read_meta(meta_path)]


def pair_setup(pair: BinnedPair) -> Setup:
    """Two orientations with X1 = cause, X2 = effect; the truth is X1 -> X2 with the binned joint."""
    hset = two_variable_hset(pair.K)
    return Setup(f"pair{pair.id}", hset, parameterize_truth(hset, pair.joint(), 0))


def weighted_mean_stderr(values, weights) -> tuple[float, float]:
    """Weighted mean and its standard error ``sqrt(sum w^2 (x - mean)^2) / sum w``."""
    x = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    mean = float(np.sum(w * x) / w.sum())
    se = float(np.sqrt(np.sum(w**2 * (x - mean) ** 2)) / w.sum())
    return mean, se


@dataclass
class PairsSummary:
    n_obs: int
    strategy: str
    weighted_mean_interventions: float
    weighted_stderr: float
    per_pair: dict  # pair id -> mean steps over restarts


def run_pairs_benchmark(
    dataset_dir: str | Path,
    n_obs: int,
    strategies: Sequence[StrategyKind | str],
    restarts: int = 20,
    alpha: float = 1.0,
    max_interventions: int = 40,
    K: int = 5,
    seed: int = 0,
    threshold: float = 0.95,
    n_jobs: int = 1,
) -> list[PairsSummary]:
    """Mean interventions to reach ``threshold`` certainty, averaged per pair over restarts, then weighted across pairs."""
    pairs = [bin_pair(p, K) for p in load_pairs(dataset_dir)]
    for p in pairs:
        if p.degenerate:
            log.warning("pair %s: ties left empty bins", p.id)
    out = []
    for s in strategies:
        per_pair = {}
        for p in pairs:
            cfg = EpisodeConfig(
                pair_setup(p),
                s,
                n_obs=n_obs,
                max_interventions=max_interventions,
                alpha=alpha,
                threshold=threshold,
                seed=seed,
            )
            per_pair[p.id] = run_experiment(cfg, restarts, n_jobs).mean_steps
        mean, se = weighted_mean_stderr([per_pair[p.id] for p in pairs], [p.weight for p in pairs])
        out.append(PairsSummary(n_obs, StrategyKind(s).value, mean, se, per_pair))
    return out
