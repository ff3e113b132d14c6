"""Sparse transition matrix of the state process and its class decomposition."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from . import _backend
from .population import StateSpace
from .revision import ProtocolSpec
from .strategy import MetaGame


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """Row-stochastic matrix in CSR form; targets within a row in canonical order.

    Only strictly positive probabilities are stored, so the stored pattern is
    the support graph of the chain.
    """

    space: StateSpace
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray
    meta: MetaGame | None = None
    spec: ProtocolSpec | None = None

    def __len__(self) -> int:
        return len(self.space)

    def row(self, i: int) -> list[tuple[int, float]]:
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return list(zip(self.indices[lo:hi].tolist(), self.data[lo:hi].tolist()))

    @property
    def rows(self):
        return [self.row(i) for i in range(len(self))]

    def prob(self, i: int, j: int) -> float:
        lo, hi = self.indptr[i], self.indptr[i + 1]
        k = np.searchsorted(self.indices[lo:hi], j)
        if k < hi - lo and self.indices[lo + k] == j:
            return float(self.data[lo + k])
        return 0.0

    def row_sums(self) -> np.ndarray:
        return np.add.reduceat(self.data, self.indptr[:-1]) if len(self.data) else np.zeros(0)

    def to_scipy(self) -> sp.csr_matrix:
        n = len(self)
        return sp.csr_matrix((self.data, self.indices, self.indptr), shape=(n, n))

    def to_dense(self) -> np.ndarray:
        return self.to_scipy().toarray()

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["from_index", "to_index", "probability"])
            for i in range(len(self)):
                for j, p in self.row(i):
                    writer.writerow([i, j, f"{p:.17g}"])


def build_transition_matrix(
    space: StateSpace, meta: MetaGame, spec: ProtocolSpec, kernels=None
) -> TransitionMatrix:
    if space.m_strategies != meta.m_strategies:
        raise ValueError(
            f"state space has {space.m_strategies} strategies, meta-game has {meta.m_strategies}"
        )
    kernels = kernels or _backend.kernels
    indptr, indices, data = kernels.transition_rows(
        meta.b, space.array, space.neighbors, int(spec.kind), spec.eta or 0.0
    )
    return TransitionMatrix(space, indptr, indices, data, meta, spec)


@dataclass(frozen=True)
class ChainClassification:
    recurrent_classes: tuple[tuple[int, ...], ...]
    transient: tuple[int, ...]
    absorbing_states: tuple[int, ...]
    labels: np.ndarray = field(repr=False)

    def class_of(self, i: int) -> int:
        """Recurrent class id of state ``i``, or -1 if transient."""
        return int(self.labels[i])


def classify_states(p: TransitionMatrix) -> ChainClassification:
    """Closed strongly connected components are the recurrent classes."""
    n = len(p)
    graph = p.to_scipy()
    _, comp = connected_components(graph, directed=True, connection="strong")
    sources = np.repeat(np.arange(n), np.diff(p.indptr))
    leaking = np.unique(comp[sources[comp[sources] != comp[p.indices]]])
    closed = np.ones(comp.max() + 1, dtype=bool)
    closed[leaking] = False

    members: dict[int, list[int]] = {}
    for i in range(n):
        if closed[comp[i]]:
            members.setdefault(int(comp[i]), []).append(i)
    # order classes by their smallest state index
    classes = tuple(tuple(v) for v in sorted(members.values(), key=lambda c: c[0]))
    labels = np.full(n, -1, dtype=np.int64)
    for k, cls in enumerate(classes):
        labels[list(cls)] = k
    labels.setflags(write=False)
    transient = tuple(int(i) for i in np.flatnonzero(labels < 0))
    absorbing = tuple(c[0] for c in classes if len(c) == 1)
    return ChainClassification(classes, transient, absorbing, labels)
