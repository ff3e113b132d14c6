import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from egchain.population import enumerate_states, payoff_profile
from egchain.revision import Protocol, ProtocolSpec, rate_matrix
from egchain.strategy import direct_meta_game

ALL_SPECS = [ProtocolSpec.parse("br"), ProtocolSpec.parse("ppc"), ProtocolSpec.parse("pc"),
             ProtocolSpec.parse("cap"), ProtocolSpec.parse("logit", 0.5)]


def R(spec, state, meta):
    return rate_matrix(spec, state, payoff_profile(state, meta)).r


def test_br_unique_best_player(ipd):
    r = R(ProtocolSpec.parse("br"), (1, 1, 1), ipd)
    assert (r == np.array([[0, 1, 0]] * 3)).all()


def test_br_pure_state(ipd):
    r = R(ProtocolSpec.parse("br"), (4, 0, 0), ipd)
    assert r[0].tolist() == [1, 0, 0]
    assert r[1].tolist() == [0, 1, 0]  # extinct rows are identity


def test_ppc_rows(ipd):
    r = R(ProtocolSpec.parse("ppc"), (1, 1, 1), ipd)
    assert r[0, 1] == pytest.approx(2002 / 3001, rel=1e-15)
    assert r[0, 2] == pytest.approx(999 / 3001, rel=1e-15)
    assert r[0, 0] == 0
    assert r[1].tolist() == [0, 1, 0]


def test_logit_uniform_on_ties():
    meta = direct_meta_game([[1, 1, 1], [1, 1, 1], [1, 1, 1]], "abc")
    r = R(ProtocolSpec.parse("logit", 2.0), (2, 0, 2), meta)
    assert r[0].tolist() == [0.5, 0, 0.5]


def test_br_ties_split_over_distinct_strategies(ipd):
    # AllC and TFT earn the same against each other
    r = R(ProtocolSpec.parse("br"), (2, 0, 1), ipd)
    assert r[0].tolist() == [0.5, 0, 0.5]


def test_cap_all_equal_stays():
    meta = direct_meta_game([[0, -1, 1], [1, 0, -1], [-1, 1, 0]], "RPS")
    r = R(ProtocolSpec.parse("cap"), (2, 2, 2), meta)
    assert (r == np.eye(3)).all()


@pytest.mark.parametrize("name, eta", [("logit", None), ("logit", 0.0), ("logit", -1.0)])
def test_logit_needs_positive_eta(name, eta):
    with pytest.raises(ValueError):
        ProtocolSpec.parse(name, eta)


def test_parse_aliases():
    assert ProtocolSpec.parse("CAV").kind is Protocol.CAP
    with pytest.raises(ValueError):
        ProtocolSpec.parse("moran")
    with pytest.raises(ValueError):
        ProtocolSpec(Protocol.BR, eta=1.0)


games = st.integers(2, 4).flatmap(
    lambda m: st.lists(st.lists(st.integers(-30, 30), min_size=m, max_size=m),
                       min_size=m, max_size=m))


@settings(max_examples=80, deadline=None)
@given(games, st.integers(1, 12), st.sampled_from(ALL_SPECS), st.data())
def test_rate_matrix_invariants(b, n, spec, data):
    m = len(b)
    meta = direct_meta_game(b, [str(k) for k in range(m)])
    s = data.draw(st.sampled_from(enumerate_states(n, m).states))
    prof = payoff_profile(s, meta)
    rm = rate_matrix(spec, s, prof)
    r = rm.r
    assert np.all(r >= 0) and np.all(r <= 1)
    assert np.abs(r.sum(axis=1) - 1).max() <= 1e-12
    for k in range(m):
        if s[k] == 0:
            assert np.all(r[:, k][np.array(s) > 0] == 0)
            assert r[k].tolist() == [1.0 if j == k else 0.0 for j in range(m)]
    present = [k for k in range(m) if s[k] > 0]
    top = max(prof.bigQ[k] for k in present)
    if spec.kind in (Protocol.PC, Protocol.PPC):
        for k in present:
            if prof.bigQ[k] == top:
                assert r[k, k] == 1.0
    if spec.kind is Protocol.CAP:
        equal = len({prof.bigQ[k] for k in present}) == 1
        positive = sum(max(prof.bigQ[k] - prof.qbar, 0) for k in present) > 0
        assert equal == (not positive)


@settings(max_examples=50, deadline=None)
@given(games, st.integers(1, 10), st.integers(-20, 20), st.data())
def test_br_invariant_under_positive_scaling(b, n, exponent, data):
    m = len(b)
    meta = direct_meta_game(b, [str(k) for k in range(m)])
    # power-of-two factors keep every payoff comparison exact
    scaled = direct_meta_game(np.array(b) * 2.0**exponent, [str(k) for k in range(m)])
    s = data.draw(st.sampled_from(enumerate_states(n, m).states))
    spec = ProtocolSpec.parse("br")
    assert (R(spec, s, meta) == R(spec, s, scaled)).all()


def test_br_argmax_invariance_integer_scaling(ipd):
    big = direct_meta_game(ipd.b * 7, ipd.names)
    spec = ProtocolSpec.parse("br")
    for s in enumerate_states(10, 3):
        assert (R(spec, s, ipd) == R(spec, s, big)).all()


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 4).flatmap(lambda m: st.permutations(range(m))), st.integers(2, 9),
       st.data())
def test_logit_concentrates_on_best(order, n, data):
    m = len(order)
    # distinct totals with gaps >= 1 at every state: payoffs are large, well separated
    b = [[1000.0 * order[i] + j for j in range(m)] for i in range(m)]
    meta = direct_meta_game(b, [str(k) for k in range(m)])
    s = data.draw(st.sampled_from(enumerate_states(n, m).states))
    prof = payoff_profile(s, meta)
    present = [k for k in range(m) if s[k] > 0]
    vals = sorted(prof.bigQ[k] for k in present)
    if any(v2 - v1 < 1 for v1, v2 in zip(vals, vals[1:])):
        return
    best = max(present, key=lambda k: prof.bigQ[k])
    r = rate_matrix(ProtocolSpec.parse("logit", 1e-3), s, prof).r
    for k in present:
        assert r[k, best] > 0.999
