"""Absorption probabilities into each recurrent class.

Solves ``(I - Q) X = R`` on the transient block. The factorization is an LU
of ``I - Q`` without pivoting in which every pivot is recomputed as the sum of
a state's remaining outflow (state reduction, Grassmann-Taksar-Heyman style),
so nothing is ever subtracted. This keeps full relative accuracy on chains
whose absorption times are astronomically long: under best response the
AllC/TitForTat edge is an Ehrenfest urn with expected absorption time of
order 2**N, and a partially pivoted LU of ``I - Q`` loses about N*log10(2)
digits there.

Canonical state order makes ``Q`` banded (single-player moves shift s1 by at
most one), elimination without pivoting keeps that band, and the cost is
O(t * b**2) for t transient states and bandwidth b ~ N.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .chain import ChainClassification, TransitionMatrix
from .population import StateSpace

# pivots are outflow sums and only vanish for a closed set mislabelled transient
PIVOT_TOL = 0.0
RESIDUAL_TOL = 1e-10
ROW_SUM_TOL = 1e-9


class SingularChainError(RuntimeError):
    """The transient block is (numerically) singular; a closed class was probably missed."""


class ResidualError(RuntimeError):
    pass


@dataclass(frozen=True)
class AbsorptionResult:
    """``probs[s, k]``: probability that the chain started at state ``s`` ends in class ``k``."""

    classes: tuple[tuple[int, ...], ...]
    probs: np.ndarray
    pure_rgb: np.ndarray
    residual: float
    labels: np.ndarray = field(repr=False)


def _pure_columns(space: StateSpace, classes) -> list[int | None]:
    where = {c[0]: k for k, c in enumerate(classes) if len(c) == 1}
    return [where.get(space.index(space.pure_state(m))) for m in range(space.m_strategies)]


def _banded_system(p: TransitionMatrix, transient, labels, n_classes):
    n = len(p)
    t = len(transient)
    pos = np.full(n, -1, dtype=np.int64)
    pos[transient] = np.arange(t)
    src = np.repeat(np.arange(n), np.diff(p.indptr))
    keep = pos[src] >= 0
    src, dst, val = pos[src[keep]], p.indices[keep], p.data[keep]
    inner = pos[dst] >= 0
    rows, cols, vals = src[inner], pos[dst[inner]], val[inner]
    off = rows != cols
    rows, cols, vals = rows[off], cols[off], vals[off]
    lbw = int(max((rows - cols).max(initial=0), 0))
    ubw = int(max((cols - rows).max(initial=0), 0))
    band = np.zeros((t, lbw + ubw + 1))
    band[rows, lbw + cols - rows] = vals
    rhs = np.zeros((t, n_classes))
    np.add.at(rhs, (src[~inner], labels[dst[~inner]]), val[~inner])
    return band, lbw, ubw, rhs, pos


def _residual(p, transient, pos, labels, x) -> float:
    """max |(I - Q) X - R| over the transient block, with the stored self-loops."""
    worst = 0.0
    for row, i in enumerate(transient):
        acc = x[row].copy()
        for j, pij in p.row(int(i)):
            if pos[j] >= 0:
                acc -= pij * x[pos[j]]
            else:
                acc[labels[j]] -= pij
        worst = max(worst, float(np.abs(acc).max()))
    return worst


def absorption_probabilities(
    p: TransitionMatrix, cls: ChainClassification, kernels=None
) -> AbsorptionResult:
    n = len(p)
    classes = cls.recurrent_classes
    n_classes = len(classes)
    labels = np.asarray(cls.labels)
    probs = np.zeros((n, n_classes))
    for k, members in enumerate(classes):
        probs[list(members), k] = 1.0

    transient = np.array(cls.transient, dtype=np.int64)
    residual = 0.0
    if len(transient) and n_classes:
        kernels = kernels or _backend.kernels
        band, lbw, ubw, rhs, pos = _banded_system(p, transient, labels, n_classes)
        x, pivots, bad = kernels.absorb_banded(band, lbw, ubw, rhs)
        if bad >= 0:
            state = p.space.states[int(transient[bad])]
            raise SingularChainError(
                f"pivot {pivots[bad] if pivots[bad] else 0.0:.3e} vanished at state {state}; "
                "a closed class was labelled transient"
            )
        residual = _residual(p, transient, pos, labels, x)
        if residual > RESIDUAL_TOL:
            raise ResidualError(f"solve residual {residual:.3e} exceeds {RESIDUAL_TOL:g}")
        probs[transient] = x

    sums = probs.sum(axis=1)
    if n_classes and np.abs(sums - 1.0).max() > ROW_SUM_TOL:
        raise ResidualError(f"absorption rows deviate from 1 by {np.abs(sums - 1).max():.3e}")

    pure = np.zeros((n, p.space.m_strategies))
    for m, k in enumerate(_pure_columns(p.space, classes)):
        if k is not None:
            pure[:, m] = probs[:, k]
    probs.setflags(write=False)
    pure.setflags(write=False)
    return AbsorptionResult(classes, probs, pure, residual, labels)


def harmonicity_residual(p: TransitionMatrix, res: AbsorptionResult) -> float:
    """max over transient states of |X - P X|."""
    transient = np.flatnonzero(res.labels < 0)
    if not len(transient) or not len(res.classes):
        return 0.0
    px = p.to_scipy() @ res.probs
    return float(np.abs(px[transient] - res.probs[transient]).max())


def rgb_colors(res: AbsorptionResult, space: StateSpace) -> list[tuple[int, int, int]]:
    """8-bit colour per state from absorption into the first three pure states.

    States of recurrent classes other than the pure absorbing states are black.
    """
    pure_ids = {space.index(space.pure_state(m)) for m in range(min(3, space.m_strategies))}
    colours = []
    for i in range(len(space)):
        k = res.labels[i]
        if k >= 0 and not (len(res.classes[k]) == 1 and i in pure_ids):
            colours.append((0, 0, 0))
            continue
        channels = [res.pure_rgb[i, m] if m < space.m_strategies else 0.0 for m in range(3)]
        colours.append(tuple(int(round(255 * min(max(c, 0.0), 1.0))) for c in channels))
    return colours


def hex_colour(rgb) -> str:
    return "#{:02X}{:02X}{:02X}".format(*rgb)


def absorption_to_csv(res: AbsorptionResult, colours, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["state_index", *(f"class_{k}" for k in range(len(res.classes))), "r", "g", "b"]
        )
        for i, row in enumerate(res.probs):
            writer.writerow([i, *(f"{v:.17g}" for v in row), *colours[i]])
