import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from egchain import presets
from egchain.strategy import (
    ALL_C,
    ALL_D,
    TIT_FOR_TAT,
    BaseGame,
    StrategyAutomaton,
    build_meta_game,
    direct_meta_game,
    play_match,
)
from oracles import trace_match

PD = BaseGame([[3, 1], [4, 2]], name="pd")
IPD_B = [[3000, 1000, 3000], [4000, 2000, 2002], [3000, 1999, 3000]]


@pytest.mark.parametrize(
    "row, col, rounds, expected",
    [
        (ALL_C, ALL_C, 1000, (3000, 3000)),
        (ALL_D, TIT_FOR_TAT, 1000, (2002, 1999)),
        (ALL_C, ALL_D, 1, (1, 4)),
    ],
)
def test_play_match_known_values(row, col, rounds, expected):
    assert play_match(row, col, PD, rounds) == expected
    assert play_match(row, col, PD, rounds, fast=True) == expected


def test_play_match_rejects_zero_rounds():
    with pytest.raises(ValueError):
        play_match(ALL_C, ALL_C, PD, 0)


def test_ipd_meta_game_known_matrix():
    meta = build_meta_game(PD, [ALL_C, ALL_D, TIT_FOR_TAT], 1000)
    assert meta.b.tolist() == IPD_B
    assert meta.names == ("AllC", "AllD", "TitForTat")
    assert meta.provenance["rounds"] == 1000


def test_single_strategy_single_round():
    meta = build_meta_game(PD, [ALL_D], 1)
    assert meta.b.tolist() == [[2.0]]


def test_stag_hunt_against_round_trace():
    A = [[10, 1], [8, 5]]
    strats = [ALL_C, ALL_D, TIT_FOR_TAT]
    expected = [[trace_match(a.initial_action, a.response, b.initial_action, b.response,
                             A, 1000)[0] for b in strats] for a in strats]
    assert expected == [[10000, 1000, 10000], [8000, 5000, 5003], [10000, 4996, 10000]]
    meta = build_meta_game(BaseGame(A), strats, 1000)
    assert meta.b.tolist() == [[float(v) for v in row] for row in expected]
    assert presets.meta_game("stag_hunt").b.tolist() == meta.b.tolist()


def test_direct_meta_game_is_identity():
    rps = [[0, -1, 1], [1, 0, -1], [-1, 1, 0]]
    meta = direct_meta_game(rps, ["R", "P", "S"])
    assert meta.b.tolist() == rps
    assert meta.provenance == "direct"
    zero = direct_meta_game([[0, 0], [0, 0]], ["a", "b"])
    assert zero.m_strategies == 2


def test_meta_game_is_immutable():
    meta = direct_meta_game([[1, 2], [3, 4]], ["a", "b"])
    with pytest.raises(ValueError):
        meta.b[0, 0] = 5


@pytest.mark.parametrize("bad", [[[1, 2, 3]], [[1, np.inf], [0, 0]], [[1]]])
def test_base_game_validation(bad):
    with pytest.raises(ValueError):
        BaseGame(bad)


def test_automaton_validation():
    with pytest.raises(ValueError):
        StrategyAutomaton("bad", 2, (0, 1))
    with pytest.raises(ValueError):
        play_match(ALL_C, StrategyAutomaton("tri", 0, (0, 1, 2)), PD, 3)


def test_meta_game_csv(tmp_path):
    meta = build_meta_game(PD, [ALL_C, ALL_D, TIT_FOR_TAT], 1000)
    meta.to_csv(tmp_path / "b.csv")
    lines = (tmp_path / "b.csv").read_text().splitlines()
    assert lines[0] == "AllC,AllD,TitForTat"
    assert lines[2] == "4000.0,2000.0,2002.0"


automata = st.integers(2, 3).flatmap(
    lambda m: st.tuples(
        st.just(m),
        st.tuples(st.integers(0, m - 1), st.lists(st.integers(0, m - 1), min_size=m, max_size=m)),
        st.tuples(st.integers(0, m - 1), st.lists(st.integers(0, m - 1), min_size=m, max_size=m)),
        st.lists(st.lists(st.integers(-20, 20), min_size=m, max_size=m), min_size=m, max_size=m),
    )
)


@settings(max_examples=60, deadline=None)
@given(automata, st.integers(1, 10_000))
def test_fast_path_equals_naive_and_trace(case, rounds):
    m, (ia, ra), (ib, rb), payoff = case
    game = BaseGame(payoff)
    a = StrategyAutomaton("a", ia, tuple(ra))
    b = StrategyAutomaton("b", ib, tuple(rb))
    naive = play_match(a, b, game, rounds)
    assert play_match(a, b, game, rounds, fast=True) == naive
    assert naive == tuple(float(v) for v in trace_match(ia, ra, ib, rb, payoff, rounds))
    # symmetric bimatrix: swapping seats swaps totals
    assert play_match(b, a, game, rounds)[1] == naive[0]


def test_meta_game_build_is_fast():
    best = min(
        _timed(lambda: build_meta_game(PD, [ALL_C, ALL_D, TIT_FOR_TAT], 1000)) for _ in range(5)
    )
    assert best < 0.010


def _timed(fn):
    t = time.perf_counter()
    fn()
    return time.perf_counter() - t
