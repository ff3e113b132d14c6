"""Mechanical checks of the two IPD best-response propositions.

Proposition 1 (T > 2N): at a state with AllD present, AllD is the best
strategy when ``N - 1 <= 2 s1 + s2`` and TitForTat otherwise; without AllD the
best strategies lie in {AllC, TitForTat}.

Proposition 2: the only absorbing states are the pure ones, and from
``S1 = {s2 = 0}`` or ``S2 = {2 s1 + s2 < N + 1}`` the chain never ends in the
pure AllD state. The second part is recorded, not enforced.
"""

from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import asdict, dataclass, field

from . import presets
from .chain import build_transition_matrix, classify_states
from .population import enumerate_states, payoff_profile
from .revision import ProtocolSpec
from .solver import absorption_probabilities
from .strategy import MetaGame

GREEN_TOL = 1e-10
ALLC, ALLD, TFT = 0, 1, 2


def best_strategies(state, meta: MetaGame, by: str = "q") -> frozenset[int]:
    """Argmax set over present strategies of per-player (``q``) or total (``Q``) payoff."""
    prof = payoff_profile(state, meta)
    values = prof.q if by == "q" else prof.bigQ
    present = [k for k, v in enumerate(state) if v > 0]
    top = max(values[k] for k in present)
    return frozenset(k for k in present if values[k] == top)


@dataclass
class PropositionReport:
    proposition: int
    n_players: int
    rounds: int | None
    violations: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    findings: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def to_text(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        lines = [
            f"proposition {self.proposition}  N={self.n_players}  T={self.rounds}  "
            f"{status}  violations={len(self.violations)}"
        ]
        for key in sorted(self.metadata):
            lines.append(f"  {key}: {self.metadata[key]}")
        for v in self.violations:
            lines.append(f"  violation state={tuple(v['state'])} expected={v['expected']} "
                         f"observed={v['observed']}")
        return "\n".join(lines)

    def violations_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["proposition", "n_players", "state", "expected", "observed"])
        for v in self.violations:
            writer.writerow([self.proposition, self.n_players,
                             " ".join(map(str, v["state"])), v["expected"], v["observed"]])
        return buf.getvalue()


def _ipd(rounds, meta):
    return meta if meta is not None else presets.meta_game("ipd", rounds=rounds)


def check_prop1(
    n_players: int, rounds: int = presets.DEFAULT_ROUNDS, meta: MetaGame | None = None,
    by: str = "q",
) -> PropositionReport:
    if by not in ("q", "Q"):
        raise ValueError("by must be 'q' (per-player payoff) or 'Q' (strategy total)")
    meta = _ipd(rounds, meta)
    report = PropositionReport(1, n_players, rounds, metadata={
        "best_strategy": "argmax per-player payoff q" if by == "q" else "argmax strategy total Q",
        "hypothesis_T_gt_2N": rounds > 2 * n_players,
    })
    if rounds <= 2 * n_players:
        msg = f"T={rounds} <= 2N={2 * n_players}: proposition 1 hypothesis not met"
        warnings.warn(msg, stacklevel=2)
        report.metadata["warning"] = msg
    n = n_players
    for s in enumerate_states(n, 3):
        best = best_strategies(s, meta, by)
        observed = sorted(k + 1 for k in best)
        if s[ALLD] > 0:
            expected = ALLD if n - 1 <= 2 * s[ALLC] + s[ALLD] else TFT
            if expected not in best:
                report.violations.append(
                    {"state": list(s), "expected": str(expected + 1), "observed": observed})
        elif not best <= {ALLC, TFT}:
            report.violations.append(
                {"state": list(s), "expected": "subset of {1,3}", "observed": observed})
    return report


def check_prop2(
    n_players: int, rounds: int = presets.DEFAULT_ROUNDS, meta: MetaGame | None = None,
) -> PropositionReport:
    """Absorbing-set check plus green-absorption probabilities over S1 and S2."""
    meta = _ipd(rounds, meta)
    space = enumerate_states(n_players, 3)
    p = build_transition_matrix(space, meta, ProtocolSpec.parse("br"))
    cls = classify_states(p)
    res = absorption_probabilities(p, cls)
    n = n_players

    expected = sorted(space.index(space.pure_state(m)) for m in range(3))
    absorbing = sorted(cls.absorbing_states)
    larger = [c for c in cls.recurrent_classes if len(c) > 1]
    report = PropositionReport(2, n, rounds, metadata={
        "absorbing_states": [list(space.states[i]) for i in absorbing],
        "absorbing_set_matches": absorbing == expected and not larger,
        "non_singleton_recurrent_classes": len(larger),
        "green_tolerance": GREEN_TOL,
    })
    if absorbing != expected or larger:
        report.violations.append({
            "state": [],
            "expected": "absorbing set {(N,0,0),(0,N,0),(0,0,N)}",
            "observed": [list(space.states[i]) for i in absorbing] + [
                [list(space.states[i]) for i in c] for c in larger],
        })

    for i, s in enumerate(space.states):
        in_s1 = s[ALLD] == 0
        in_s2 = 2 * s[ALLC] + s[ALLD] < n + 1
        if not (in_s1 or in_s2):
            continue
        green = float(res.pure_rgb[i, ALLD])
        report.findings.append({"state": list(s), "S1": in_s1, "S2": in_s2,
                                "green_probability": green})
        if green > GREEN_TOL:
            report.violations.append(
                {"state": list(s), "expected": f"P(green) <= {GREEN_TOL:g}",
                 "observed": repr(green)})
    return report


def findings_csv(report: PropositionReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n_players", "s1", "s2", "s3", "in_S1", "in_S2", "green_probability"])
    for f in report.findings:
        writer.writerow([report.n_players, *f["state"], int(f["S1"]), int(f["S2"]),
                         f"{f['green_probability']:.17g}"])
    return buf.getvalue()
