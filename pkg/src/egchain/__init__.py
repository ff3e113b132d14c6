"""Finite-population Markov chains induced by evolutionary games."""

from ._backend import BACKEND
from .chain import (
    ChainClassification,
    TransitionMatrix,
    build_transition_matrix,
    classify_states,
)
from .population import PayoffProfile, StateSpace, enumerate_states, payoff_profile, player_payoff
from .revision import Protocol, ProtocolSpec, RateMatrix, rate_matrix
from .solver import AbsorptionResult, SingularChainError, absorption_probabilities, rgb_colors
from .strategy import (
    ALL_C,
    ALL_D,
    TIT_FOR_TAT,
    BaseGame,
    MetaGame,
    StrategyAutomaton,
    build_meta_game,
    direct_meta_game,
    play_match,
)

__version__ = "0.1.0"
