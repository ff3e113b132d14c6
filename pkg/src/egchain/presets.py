"""Built-in games: iterated Prisoner's Dilemma, iterated Stag Hunt, Rock-Paper-Scissors."""

from __future__ import annotations

from typing import Sequence

from .strategy import BaseGame, MetaGame, build_meta_game, direct_meta_game, strategy_by_name

IPD = ((3.0, 1.0), (4.0, 2.0))
STAG_HUNT = ((10.0, 1.0), (8.0, 5.0))
RPS = ((0.0, -1.0, 1.0), (1.0, 0.0, -1.0), (-1.0, 1.0, 0.0))

ITERATED = {"ipd": IPD, "stag_hunt": STAG_HUNT}
DIRECT = {"rps": (RPS, ("Rock", "Paper", "Scissors"))}
PRESETS = (*ITERATED, *DIRECT)

DEFAULT_STRATEGIES = ("AllC", "AllD", "TitForTat")
DEFAULT_ROUNDS = 1000


def base_game(name: str, a: float | None = None) -> BaseGame:
    """Preset base game; ``a`` replaces the mutual-cooperation payoff."""
    key = name.lower().replace("-", "_")
    if key not in ITERATED:
        raise ValueError(f"{name!r} is not an iterated preset; choose from {sorted(ITERATED)}")
    rows = [list(r) for r in ITERATED[key]]
    if a is not None:
        rows[0][0] = float(a)
    return BaseGame(rows, name=key if a is None else f"{key}(a={a:g})")


def meta_game(
    name: str,
    rounds: int = DEFAULT_ROUNDS,
    strategies: Sequence[str] = DEFAULT_STRATEGIES,
    a: float | None = None,
) -> MetaGame:
    key = name.lower().replace("-", "_")
    if key in DIRECT:
        if a is not None:
            raise ValueError(f"parameter a does not apply to {key}")
        payoff, names = DIRECT[key]
        return direct_meta_game(payoff, names)
    if key not in ITERATED:
        raise ValueError(f"unknown game preset {name!r}; choose from {list(PRESETS)}")
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    strats = [strategy_by_name(s) for s in strategies]
    if len(strats) != 3:
        raise ValueError(f"presets take exactly three strategies, got {len(strats)}")
    return build_meta_game(base_game(key, a), strats, rounds)
