"""State space of strategy counts and the payoffs players collect at each state."""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass
from functools import cached_property
from math import comb

import numpy as np

from .strategy import MetaGame


def _compositions(n: int, m: int):
    # ascending lexicographic order over (s_1, ..., s_M)
    if m == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in _compositions(n - first, m - 1):
            yield (first, *rest)


class StateSpace:
    """All compositions of ``n_players`` into ``m_strategies`` counts, canonically indexed."""

    def __init__(self, n_players: int, m_strategies: int):
        if n_players < 1:
            raise ValueError("n_players must be >= 1")
        if m_strategies < 1:
            raise ValueError("m_strategies must be >= 1")
        self.n_players = n_players
        self.m_strategies = m_strategies
        self.states: tuple[tuple[int, ...], ...] = tuple(_compositions(n_players, m_strategies))
        self._index = {s: i for i, s in enumerate(self.states)}

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    def __contains__(self, state) -> bool:
        return tuple(state) in self._index

    def __repr__(self) -> str:
        return f"StateSpace(n_players={self.n_players}, m_strategies={self.m_strategies})"

    def index(self, state) -> int:
        try:
            return self._index[tuple(int(v) for v in state)]
        except KeyError:
            raise KeyError(f"{tuple(state)} is not a state of {self!r}") from None

    def pure_state(self, m: int) -> tuple[int, ...]:
        s = [0] * self.m_strategies
        s[m] = self.n_players
        return tuple(s)

    @cached_property
    def array(self) -> np.ndarray:
        arr = np.array(self.states, dtype=np.int64).reshape(len(self), self.m_strategies)
        arr.setflags(write=False)
        return arr

    @cached_property
    def neighbors(self) -> np.ndarray:
        """``neighbors[i, m1, m2]``: index of the state after one m1-user adopts m2, else -1."""
        m = self.m_strategies
        table = np.full((len(self), m, m), -1, dtype=np.int64)
        for i, s in enumerate(self.states):
            for m1, m2 in itertools.permutations(range(m), 2):
                if s[m1] == 0:
                    continue
                t = list(s)
                t[m1] -= 1
                t[m2] += 1
                table[i, m1, m2] = self._index[tuple(t)]
        table.setflags(write=False)
        return table

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["index", *(f"s{k + 1}" for k in range(self.m_strategies))])
            for i, s in enumerate(self.states):
                writer.writerow([i, *s])


def enumerate_states(n_players: int, m_strategies: int) -> StateSpace:
    space = StateSpace(n_players, m_strategies)
    assert len(space) == comb(n_players + m_strategies - 1, m_strategies - 1)
    return space


def player_payoff(state, meta: MetaGame, m: int) -> float:
    """Payoff of one m-user who plays every other player once.

    Defined for extinct ``m`` too (value of a hypothetical single m-user).
    """
    b = meta.b
    acc = 0.0
    for k, count in enumerate(state):
        acc += count * b[m, k]
    return float(acc - b[m, m])


@dataclass(frozen=True)
class PayoffProfile:
    q: tuple[float, ...]
    bigQ: tuple[float, ...]
    xbar: tuple[float, ...]
    qbar: float
    qhat: float


def payoff_profile(state, meta: MetaGame) -> PayoffProfile:
    state = tuple(int(v) for v in state)
    if len(state) != meta.m_strategies:
        raise ValueError(f"state {state} does not match a {meta.m_strategies}-strategy game")
    n = sum(state)
    q = tuple(player_payoff(state, meta, m) for m in range(len(state)))
    big = tuple(s * qm for s, qm in zip(state, q))
    x = tuple(s / n for s in state)
    qbar = float(sum(s * Q for s, Q in zip(state, big)) / n)
    return PayoffProfile(q=q, bigQ=big, xbar=x, qbar=qbar, qhat=max(big))
