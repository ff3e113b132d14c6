"""Revision protocols: per-state M x M switching matrices.

Every protocol restricts adoption to strategies present in the population,
and a revising player with nothing to gain keeps his strategy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .population import PayoffProfile


class Protocol(IntEnum):
    BR = 0
    PPC = 1
    PC = 2
    CAP = 3
    LOGIT = 4


_ALIASES = {"cav": Protocol.CAP}


@dataclass(frozen=True)
class ProtocolSpec:
    kind: Protocol
    eta: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Protocol(self.kind))
        if self.kind is Protocol.LOGIT:
            if self.eta is None or not self.eta > 0 or not math.isfinite(self.eta):
                raise ValueError(f"logit protocol needs a finite eta > 0, got {self.eta}")
            object.__setattr__(self, "eta", float(self.eta))
        elif self.eta is not None:
            raise ValueError(f"eta only applies to the logit protocol, not {self.kind.name}")

    @classmethod
    def parse(cls, name: str, eta: float | None = None) -> "ProtocolSpec":
        key = name.strip().lower()
        kind = _ALIASES.get(key)
        if kind is None:
            try:
                kind = Protocol[key.upper()]
            except KeyError:
                raise ValueError(
                    f"unknown protocol {name!r}; expected one of br|ppc|pc|cap|logit"
                ) from None
        return cls(kind, eta if kind is Protocol.LOGIT else None)

    @property
    def label(self) -> str:
        if self.kind is Protocol.LOGIT:
            return f"logit(eta={self.eta:g})"
        return self.kind.name.lower()

    def as_dict(self) -> dict:
        return {"kind": self.kind.name.lower(), "eta": self.eta}


@dataclass(frozen=True)
class RateMatrix:
    r: np.ndarray
    support: frozenset


def _identity(m):
    return [[1.0 if i == j else 0.0 for j in range(m)] for i in range(m)]


def rate_rows(code: int, eta: float, state, q, big, qbar) -> list[list[float]]:
    """Rate matrix as nested lists from precomputed payoffs.

    The floating-point operation order here is mirrored exactly by the
    compiled kernel; keep the two in sync.
    """
    m = len(state)
    present = [k for k in range(m) if state[k] > 0]
    n = 0
    for v in state:
        n += v
    r = _identity(m)

    if code == Protocol.BR:
        best = max(q[k] for k in present)
        winners = [k for k in present if q[k] == best]
        share = 1.0 / len(winners)
        row = [0.0] * m
        for k in winners:
            row[k] = share
        for m1 in present:
            r[m1] = list(row)
        return r

    if code == Protocol.PPC or code == Protocol.PC:
        for m1 in present:
            w = [0.0] * m
            den = 0.0
            for m2 in present:
                gain = big[m2] - big[m1]
                if gain > 0.0:
                    w[m2] = (state[m2] / n) * gain if code == Protocol.PPC else gain
                den += w[m2]
            if den > 0.0:
                r[m1] = [wk / den for wk in w]
        return r

    if code == Protocol.CAP:
        first = big[present[0]]
        if all(big[k] == first for k in present):
            return r
        w = [0.0] * m
        den = 0.0
        for m2 in present:
            gain = big[m2] - qbar
            if gain > 0.0:
                w[m2] = gain
            den += w[m2]
        if den > 0.0:
            row = [wk / den for wk in w]
            for m1 in present:
                r[m1] = list(row)
        return r

    if code == Protocol.LOGIT:
        top = max(big[k] for k in present)
        w = [0.0] * m
        den = 0.0
        for m2 in present:
            w[m2] = math.exp((big[m2] - top) / eta)
            den += w[m2]
        row = [wk / den for wk in w]
        for m1 in present:
            r[m1] = list(row)
        return r

    raise ValueError(f"unknown protocol code {code}")


def rate_matrix(spec: ProtocolSpec, state, profile: PayoffProfile) -> RateMatrix:
    state = tuple(int(v) for v in state)
    if not any(state):
        raise ValueError("state has no players")
    rows = rate_rows(
        int(spec.kind), spec.eta or 0.0, state, profile.q, profile.bigQ, profile.qbar
    )
    support = frozenset(k for k, v in enumerate(state) if v > 0)
    return RateMatrix(np.array(rows), support)
