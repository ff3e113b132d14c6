"""Base games, memory-one strategies and the iterated meta-game matrix."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

COOPERATE, DEFECT = 0, 1


def _frozen_matrix(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class BaseGame:
    """One-shot symmetric game; ``payoff[i, j]`` is the row player's payoff.

    The column player receives ``payoff[j, i]``.
    """

    payoff: np.ndarray
    name: str = "game"

    def __post_init__(self):
        arr = _frozen_matrix(self.payoff, "payoff")
        if arr.shape[0] < 2:
            raise ValueError("a base game needs at least two actions")
        object.__setattr__(self, "payoff", arr)

    @property
    def m(self) -> int:
        return self.payoff.shape[0]


@dataclass(frozen=True)
class StrategyAutomaton:
    """Memory-one strategy: an opening action and a reply to the opponent's last action."""

    name: str
    initial_action: int
    response: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "response", tuple(int(a) for a in self.response))
        n_actions = len(self.response)
        if n_actions < 2:
            raise ValueError(f"{self.name}: response must cover at least two actions")
        actions = (self.initial_action, *self.response)
        if any(a < 0 or a >= n_actions for a in actions):
            raise ValueError(f"{self.name}: action index out of range 0..{n_actions - 1}")

    def check_game(self, game: BaseGame) -> None:
        if len(self.response) != game.m:
            raise ValueError(
                f"{self.name} is defined over {len(self.response)} actions, game has {game.m}"
            )

    def next_action(self, opponent_last: int) -> int:
        return self.response[opponent_last]


ALL_C = StrategyAutomaton("AllC", COOPERATE, (COOPERATE, COOPERATE))
ALL_D = StrategyAutomaton("AllD", DEFECT, (DEFECT, DEFECT))
TIT_FOR_TAT = StrategyAutomaton("TitForTat", COOPERATE, (COOPERATE, DEFECT))
SUSPICIOUS_TFT = StrategyAutomaton("SuspiciousTitForTat", DEFECT, (COOPERATE, DEFECT))

BUILTIN_STRATEGIES = {
    s.name: s for s in (ALL_C, ALL_D, TIT_FOR_TAT, SUSPICIOUS_TFT)
}
STRATEGY_ALIASES = {"tft": "TitForTat", "stft": "SuspiciousTitForTat"}


def strategy_by_name(name: str) -> StrategyAutomaton:
    key = STRATEGY_ALIASES.get(name.lower(), name)
    for known, strat in BUILTIN_STRATEGIES.items():
        if known.lower() == key.lower():
            return strat
    raise KeyError(f"unknown strategy {name!r}; known: {sorted(BUILTIN_STRATEGIES)}")


@dataclass(frozen=True)
class MetaGame:
    """M x M matrix of total payoffs between strategies.

    ``provenance`` is ``"direct"`` for one-shot games, otherwise a dict with
    the base game, strategy names and round count.
    """

    b: np.ndarray
    names: tuple[str, ...]
    provenance: object = "direct"

    def __post_init__(self):
        arr = _frozen_matrix(self.b, "b")
        object.__setattr__(self, "b", arr)
        object.__setattr__(self, "names", tuple(self.names))
        if len(self.names) != arr.shape[0]:
            raise ValueError(f"{len(self.names)} names for a {arr.shape[0]}x{arr.shape[0]} matrix")

    @property
    def m_strategies(self) -> int:
        return self.b.shape[0]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(self.names)
            for row in self.b:
                writer.writerow(repr(float(v)) for v in row)


def _joint_actions(row: StrategyAutomaton, col: StrategyAutomaton):
    a, b = row.initial_action, col.initial_action
    while True:
        yield a, b
        a, b = row.next_action(b), col.next_action(a)


def play_match(
    row: StrategyAutomaton,
    col: StrategyAutomaton,
    game: BaseGame,
    rounds: int,
    fast: bool = False,
) -> tuple[float, float]:
    """Total payoffs of both players after ``rounds`` rounds of deterministic play.

    With ``fast=True`` the eventually periodic joint action sequence is
    summed in closed form (prefix + whole cycles + remainder). For integral
    payoffs both paths agree exactly.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    row.check_game(game)
    col.check_game(game)
    A = game.payoff.tolist()
    if not fast:
        ra, rb = row.response, col.response
        a, b = row.initial_action, col.initial_action
        row_total = col_total = 0.0
        for _ in range(rounds):
            row_total += A[a][b]
            col_total += A[b][a]
            a, b = ra[b], rb[a]
        return row_total, col_total

    # joint state of two memory-one automata is the last action pair, so the
    # sequence cycles within m*m rounds
    seen: dict[tuple[int, int], int] = {}
    seq: list[tuple[int, int]] = []
    cycle_start = None
    for pair in _joint_actions(row, col):
        if len(seq) == rounds:
            break
        if pair in seen:
            cycle_start = seen[pair]
            break
        seen[pair] = len(seq)
        seq.append(pair)

    def total(pairs, who):
        acc = 0.0
        for a, b in pairs:
            acc += A[a][b] if who == 0 else A[b][a]
        return acc

    if cycle_start is None:
        return total(seq, 0), total(seq, 1)
    prefix, cycle = seq[:cycle_start], seq[cycle_start:]
    reps, rem = divmod(rounds - len(prefix), len(cycle))
    row_total, col_total = (
        total(prefix, who) + reps * total(cycle, who) + total(cycle[:rem], who)
        for who in (0, 1)
    )
    return row_total, col_total


def build_meta_game(
    game: BaseGame,
    strategies: Sequence[StrategyAutomaton],
    rounds: int,
    fast: bool = False,
) -> MetaGame:
    if not strategies:
        raise ValueError("need at least one strategy")
    m = len(strategies)
    b = np.empty((m, m))
    # one match fills both B[i][j] and B[j][i]
    for i, si in enumerate(strategies):
        for j in range(i, m):
            b[i, j], b[j, i] = play_match(si, strategies[j], game, rounds, fast=fast)
    provenance = {
        "base_game": game.name,
        "payoff": game.payoff.tolist(),
        "strategies": [s.name for s in strategies],
        "rounds": rounds,
    }
    return MetaGame(b, [s.name for s in strategies], provenance)


def direct_meta_game(payoff, names: Sequence[str]) -> MetaGame:
    """Use a one-shot payoff matrix as the meta-game unchanged."""
    return MetaGame(payoff, names, "direct")

