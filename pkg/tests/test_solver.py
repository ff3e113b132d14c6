from fractions import Fraction

import numpy as np
import pytest
import scipy.linalg

from egchain import presets
from egchain.chain import build_transition_matrix, classify_states
from egchain.population import enumerate_states
from egchain.revision import ProtocolSpec
from egchain.solver import (
    SingularChainError,
    absorption_probabilities,
    harmonicity_residual,
    hex_colour,
    rgb_colors,
)
from egchain.chain import ChainClassification
from oracles import birth_death_hit_top

BR = ProtocolSpec.parse("br")


def solve(meta, n, spec=BR, kernels=None):
    space = enumerate_states(n, meta.m_strategies)
    p = build_transition_matrix(space, meta, spec)
    cls = classify_states(p)
    return space, p, cls, absorption_probabilities(p, cls, kernels=kernels)


def test_ipd_br_n3_examples(ipd):
    space, p, cls, res = solve(ipd, 3)
    assert res.pure_rgb[space.index((0, 1, 2))].tolist() == [0, 0, 1]
    assert res.pure_rgb[space.index((2, 1, 0))] == pytest.approx([0, 1, 0], abs=1e-15)
    for k, members in enumerate(res.classes):
        unit = np.zeros(len(res.classes))
        unit[k] = 1
        assert res.probs[members[0]].tolist() == unit.tolist()


def test_colours(ipd):
    space, p, cls, res = solve(ipd, 3)
    colours = rgb_colors(res, space)
    assert hex_colour(colours[space.index((3, 0, 0))]) == "#FF0000"
    assert hex_colour(colours[space.index((0, 3, 0))]) == "#00FF00"
    assert hex_colour(colours[space.index((0, 0, 3))]) == "#0000FF"
    # (1,0,2): AllC/TFT edge, red with probability 0.4
    assert colours[space.index((1, 0, 2))] == (102, 0, 153)


def test_non_pure_absorbing_state_is_black(rps):
    space, p, cls, res = solve(rps, 6, ProtocolSpec.parse("pc"))
    centre = space.index((2, 2, 2))
    assert centre in cls.absorbing_states
    assert rgb_colors(res, space)[centre] == (0, 0, 0)
    assert res.pure_rgb[centre].sum() == 0


def test_larger_recurrent_class_is_black():
    from egchain.strategy import direct_meta_game

    meta = direct_meta_game([[0, 1, 0], [1, 0, 0], [0, 0, -5]], ["a", "b", "c"])
    space, p, cls, res = solve(meta, 3)
    colours = rgb_colors(res, space)
    cycle = [c for c in cls.recurrent_classes if len(c) > 1]
    assert cycle
    for i in cycle[0]:
        assert colours[i] == (0, 0, 0)


@pytest.mark.parametrize("game", ["ipd", "stag_hunt", "rps"])
@pytest.mark.parametrize("protocol, eta", [("br", None), ("ppc", None), ("cap", None), ("logit", 1.0)])
def test_against_dense_lu(game, protocol, eta):
    """Dense partially pivoted LU is an independent route where the block is well conditioned."""
    meta = presets.meta_game(game)
    space, p, cls, res = solve(meta, 8, ProtocolSpec.parse(protocol, eta))
    t = list(cls.transient)
    if not t:
        return
    P = p.to_dense()
    Q = P[np.ix_(t, t)]
    R = np.stack([P[t][:, list(c)].sum(axis=1) for c in cls.recurrent_classes], axis=1)
    x = scipy.linalg.solve(np.eye(len(t)) - Q, R)
    assert np.abs(x - res.probs[t]).max() < 1e-9


@pytest.mark.parametrize("n", [10, 20, 30, 60])
def test_ehrenfest_edge_matches_birth_death_formula(ipd, n):
    """On s2 = 0 the BR chain is a birth-death chain; compare with the exact formula."""
    space, p, cls, res = solve(ipd, n)
    # site k = s1; up = TFT player picks AllC, down = AllC player picks TFT
    up = [Fraction(n - k, 2 * n) for k in range(1, n)]
    down = [Fraction(k, 2 * n) for k in range(1, n)]
    for k in range(1, n):
        exact = birth_death_hit_top(up, down, k)
        got = res.pure_rgb[space.index((k, 0, n - k)), 0]
        assert abs(got - float(exact)) <= 1e-12 * max(1.0, float(exact))


@pytest.mark.parametrize("game", ["ipd", "rps", "stag_hunt"])
def test_harmonicity_and_row_sums(game):
    for protocol, eta in [("br", None), ("pc", None), ("logit", 0.1)]:
        space, p, cls, res = solve(presets.meta_game(game), 20, ProtocolSpec.parse(protocol, eta))
        assert harmonicity_residual(p, res) <= 1e-9
        assert res.residual <= 1e-10
        assert np.abs(res.probs.sum(axis=1) - 1).max() <= 1e-9
        pure_sum = res.pure_rgb.sum(axis=1)
        assert (pure_sum <= 1 + 1e-9).all()
        if all(len(c) == 1 for c in cls.recurrent_classes) and len(cls.recurrent_classes) == 3:
            assert np.abs(pure_sum - 1).max() <= 1e-9


def test_backends_bit_identical(ipd):
    from conftest import BACKENDS

    results = [solve(ipd, 25, kernels=k)[3].probs for k in BACKENDS]
    for other in results[1:]:
        assert np.array_equal(other, results[0])


def test_misclassification_signalled(ipd):
    space = enumerate_states(4, 3)
    p = build_transition_matrix(space, ipd, BR)
    cls = classify_states(p)
    # declare the pure AllD state transient: it can never be left
    keep = tuple(c for c in cls.recurrent_classes if space.states[c[0]] != (0, 4, 0))
    labels = np.full(len(space), -1)
    for k, c in enumerate(keep):
        labels[list(c)] = k
    bad = ChainClassification(keep, tuple(int(i) for i in np.flatnonzero(labels < 0)), (), labels)
    with pytest.raises(SingularChainError):
        absorption_probabilities(p, bad)
