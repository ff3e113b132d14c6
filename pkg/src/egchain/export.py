"""DOT state-transition graphs and the CSV/JSON artifact set of a run."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__, rng
from .chain import ChainClassification, TransitionMatrix
from .population import StateSpace
from .solver import AbsorptionResult, absorption_to_csv, hex_colour
from .strategy import MetaGame


def node_id(state) -> str:
    return "s_" + "_".join(str(v) for v in state)


def _fmt(x: float) -> str:
    return f"{x:g}"


def to_dot(
    p: TransitionMatrix,
    colours,
    self_loops: bool = False,
    scale: float = 1.0,
    title: str | None = None,
) -> str:
    """Directed graph pinned at (s1, s2), nodes filled with their RGB colour.

    Output depends only on the inputs; nodes follow canonical state order and
    edges follow target order.
    """
    space = p.space
    lines = ["digraph stg {"]
    if title:
        lines.append(f'  graph [label="{title}", labelloc=t];')
    lines.append('  node [shape=circle, width=0.2, fixedsize=true, label=""];')
    lines.append("  edge [arrowsize=0.4, fontsize=6];")
    for i, s in enumerate(space.states):
        x = s[0] * scale
        y = (s[1] if len(s) > 1 else 0) * scale
        lines.append(
            f'  {node_id(s)} [pos="{_fmt(x)},{_fmt(y)}!", style=filled, '
            f'fillcolor="{hex_colour(colours[i])}"];'
        )
    for i, s in enumerate(space.states):
        for j, prob in p.row(i):
            if j == i and not self_loops:
                continue
            lines.append(f'  {node_id(s)} -> {node_id(space.states[j])} [label="{prob:.4f}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


@dataclass
class RunArtifacts:
    meta: MetaGame
    space: StateSpace
    p: TransitionMatrix
    cls: ChainClassification
    result: AbsorptionResult | None
    colours: list
    metadata: dict = field(default_factory=dict)


def run_metadata(art: RunArtifacts, extra: dict | None = None) -> dict:
    spec = art.p.spec
    prov = art.meta.provenance
    meta = {
        "tool": "egchain",
        "tool_version": __version__,
        "game": prov if isinstance(prov, dict) else {"direct": art.meta.b.tolist()},
        "strategies": list(art.meta.names),
        "protocol": spec.kind.name.lower() if spec else None,
        "eta": spec.eta if spec else None,
        "n_players": art.space.n_players,
        "rounds": prov.get("rounds") if isinstance(prov, dict) else None,
        "n_states": len(art.space),
        "prng": rng.NAME,
        "absorbing_states": [list(art.space.states[i]) for i in art.cls.absorbing_states],
        "recurrent_class_sizes": [len(c) for c in art.cls.recurrent_classes],
    }
    meta.update(art.metadata)
    if extra:
        meta.update(extra)
    return meta


def _write(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def export_all(art: RunArtifacts, out_dir, self_loops: bool = False, scale: float = 1.0,
               extra_metadata: dict | None = None) -> list[Path]:
    out = Path(out_dir)
    os.makedirs(out, exist_ok=True)
    written = []

    def path(name):
        written.append(out / name)
        return out / name

    art.space.to_csv(path("states.csv"))
    art.meta.to_csv(path("b_matrix.csv"))
    art.p.to_csv(path("transitions.csv"))
    if art.result is not None:
        absorption_to_csv(art.result, art.colours, path("absorption.csv"))
    spec = art.p.spec
    title = f"{'/'.join(art.meta.names)} {spec.label if spec else ''} N={art.space.n_players}"
    _write(path("stg.dot"), to_dot(art.p, art.colours, self_loops, scale, title.strip()))
    _write(path("run_metadata.json"),
           json.dumps(run_metadata(art, extra_metadata), indent=2, sort_keys=True) + "\n")
    return written
