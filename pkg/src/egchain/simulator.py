"""Seeded realizations of the state process and Monte-Carlo absorption counts."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import _backend, rng
from .chain import ChainClassification, TransitionMatrix

MASK64 = rng.MASK64


@dataclass(frozen=True)
class Trajectory:
    states: tuple[tuple[int, ...], ...]
    indices: np.ndarray = field(repr=False)
    seed: int
    spec: dict = field(default_factory=dict)
    prng: str = rng.NAME

    def __len__(self) -> int:
        return len(self.states)

    def to_csv(self, path) -> None:
        m = len(self.states[0])
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["generation", *(f"s{k + 1}" for k in range(m))])
            for j, s in enumerate(self.states):
                writer.writerow([j, *s])


def _provenance(p: TransitionMatrix) -> dict:
    out = {}
    if p.spec is not None:
        out["protocol"] = p.spec.as_dict()
    if p.meta is not None:
        out["meta_game"] = p.meta.provenance
    return out


def simulate(p: TransitionMatrix, start, generations: int, seed: int, kernels=None) -> Trajectory:
    """Sample ``generations`` steps from ``start`` using stream 0 of ``seed``."""
    if generations < 0:
        raise ValueError("generations must be >= 0")
    if tuple(start) not in p.space:
        raise ValueError(f"start {tuple(start)} is not in {p.space!r}")
    kernels = kernels or _backend.kernels
    seed = int(seed) & MASK64
    idx = kernels.sample_path(
        p.indptr, p.indices, p.data, p.space.index(start), generations, seed, 0
    )
    states = tuple(p.space.states[i] for i in idx.tolist())
    return Trajectory(states, idx, seed, _provenance(p))


@dataclass(frozen=True)
class BatchResult:
    counts: np.ndarray
    runs: int
    not_absorbed: int

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.runs


def batch_absorption(
    p: TransitionMatrix,
    cls: ChainClassification,
    start,
    runs: int,
    horizon: int,
    seed: int,
    kernels=None,
) -> BatchResult:
    """Run independent chains until they enter a recurrent class or hit ``horizon``.

    Run ``k`` uses PRNG stream ``k`` of ``seed``, so results do not depend on
    how runs are scheduled.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    if tuple(start) not in p.space:
        raise ValueError(f"start {tuple(start)} is not in {p.space!r}")
    kernels = kernels or _backend.kernels
    counts, not_absorbed = kernels.batch_absorb(
        p.indptr,
        p.indices,
        p.data,
        np.asarray(cls.labels, dtype=np.int64),
        len(cls.recurrent_classes),
        p.space.index(start),
        runs,
        horizon,
        int(seed) & MASK64,
    )
    return BatchResult(counts, runs, int(not_absorbed))


def balanced_start(n_players: int, m_strategies: int = 3) -> tuple[int, ...]:
    """Most even composition; leftover players go to the lowest-numbered strategies."""
    base, extra = divmod(n_players, m_strategies)
    return tuple(base + (1 if k < extra else 0) for k in range(m_strategies))
