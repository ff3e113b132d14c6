"""Meta-game -> chain -> classes -> absorption -> colours, in one call."""

from __future__ import annotations

from .chain import build_transition_matrix, classify_states
from .export import RunArtifacts
from .population import enumerate_states
from .revision import ProtocolSpec
from .solver import absorption_probabilities, rgb_colors
from .strategy import MetaGame


def analyze(meta: MetaGame, n_players: int, spec: ProtocolSpec, solve: bool = True) -> RunArtifacts:
    space = enumerate_states(n_players, meta.m_strategies)
    p = build_transition_matrix(space, meta, spec)
    cls = classify_states(p)
    if solve:
        res = absorption_probabilities(p, cls)
        colours = rgb_colors(res, space)
    else:
        res = None
        pure = {space.index(space.pure_state(m)): m for m in range(min(3, space.m_strategies))}
        colours = []
        for i in range(len(space)):
            rgb = [0, 0, 0]
            if i in pure:
                rgb[pure[i]] = 255
            colours.append(tuple(rgb))
    return RunArtifacts(meta, space, p, cls, res, colours)
