"""Command-line entry point.

Every subcommand accepts ``--config FILE`` (JSON); command-line flags override
values from the file. Output goes to ``--out`` or, when omitted, to a
directory named after the run under ``$EGCHAIN_OUT`` (default ``runs``).
"""

from __future__ import annotations

import argparse
import itertools
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import checker, presets
from ._backend import BACKEND
from .export import RunArtifacts, export_all, run_metadata
from .pipeline import analyze
from .revision import ProtocolSpec
from .simulator import balanced_start, batch_absorption, simulate
from .strategy import BaseGame, StrategyAutomaton, build_meta_game, direct_meta_game, strategy_by_name

log = logging.getLogger("egchain")

OUT_ENV = "EGCHAIN_OUT"


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    game: str = "ipd"
    matrix: list | None = None
    iterated: bool = True
    a: float | None = None
    strategies: list = field(default_factory=lambda: list(presets.DEFAULT_STRATEGIES))
    rounds: int = presets.DEFAULT_ROUNDS
    players: list = field(default_factory=lambda: [3])
    protocol: str = "br"
    eta: float | None = None
    generations: int = 100
    seed: int = 0
    init: list | None = None
    runs: int = 0
    horizon: int = 1_000_000
    out: str | None = None
    self_loops: bool = False
    scale: float = 1.0
    by: str = "q"
    strict: bool = False
    jobs: int = 1
    params: dict = field(default_factory=dict)

    def spec(self) -> ProtocolSpec:
        try:
            return ProtocolSpec.parse(self.protocol, self.eta)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def meta_game(self):
        if self.rounds is None or self.rounds <= 0:
            raise ConfigError(f"rounds must be positive, got {self.rounds}")
        try:
            if self.matrix is not None:
                if not self.iterated:
                    names = [str(s) if isinstance(s, str) else s["name"] for s in self.strategies]
                    if len(names) != len(self.matrix):
                        names = [f"S{k + 1}" for k in range(len(self.matrix))]
                    return direct_meta_game(self.matrix, names)
                rows = [list(map(float, r)) for r in self.matrix]
                if self.a is not None:
                    rows[0][0] = float(self.a)
                strats = [_strategy(s) for s in self.strategies]
                return build_meta_game(BaseGame(rows, name="custom"), strats, self.rounds)
            names = [s if isinstance(s, str) else None for s in self.strategies]
            if None in names:
                raise ConfigError("custom strategy definitions need an inline matrix")
            return presets.meta_game(self.game, self.rounds, names, self.a)
        except (KeyError, ValueError) as exc:
            raise ConfigError(str(exc).strip("'\"")) from None

    def run_name(self, n: int) -> str:
        game = "custom" if self.matrix is not None else self.game
        parts = [game]
        if self.a is not None:
            parts.append(f"a{self.a:g}")
        parts.append(self.spec().label.replace("(eta=", "_eta").rstrip(")"))
        parts.append(f"N{n}")
        return "_".join(parts)

    def metadata(self) -> dict:
        return {"config": {k: v for k, v in self.__dict__.items() if k not in ("out", "jobs")}}


def _strategy(entry):
    if isinstance(entry, str):
        return strategy_by_name(entry)
    return StrategyAutomaton(entry["name"], int(entry["initial"]), tuple(entry["response"]))


def parse_players(text) -> list[int]:
    """``"3"``, ``"3,5,9"`` or ``"3..15"`` (inclusive)."""
    if isinstance(text, int):
        return [text]
    if isinstance(text, list):
        return [int(v) for v in text]
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out or min(out) < 1:
        raise ConfigError(f"bad player count specification {text!r}")
    return out


def _floats(text) -> list[float]:
    if isinstance(text, (int, float)):
        return [float(text)]
    if isinstance(text, list):
        return [float(v) for v in text]
    return [float(v) for v in str(text).split(",") if v.strip()]


def _parse_params(items) -> dict:
    params = {}
    for item in items or []:
        key, _, values = item.partition("=")
        key = key.strip().lower()
        if key not in ("a", "players", "protocol", "eta"):
            raise ConfigError(f"unknown sweep parameter {key!r}")
        if key == "players":
            params[key] = parse_players(values)
        elif key == "protocol":
            params[key] = [v.strip() for v in values.split(",") if v.strip()]
        else:
            params[key] = _floats(values)
    return params


_FLAG_KEYS = (
    "game", "a", "rounds", "protocol", "eta", "generations", "seed", "runs", "horizon",
    "out", "scale", "by", "jobs",
)


def load_config(args) -> RunConfig:
    data = {}
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            data = json.load(fh)
    cfg = RunConfig()
    game = data.get("game")
    if isinstance(game, dict):
        if "matrix" in game:
            cfg.matrix = game["matrix"]
            cfg.iterated = bool(game.get("iterated", True))
        cfg.game = game.get("preset", cfg.game)
        cfg.a = game.get("a", cfg.a)
    elif isinstance(game, str):
        cfg.game = game
    for key in ("strategies", "rounds", "protocol", "eta", "generations", "seed", "init", "runs",
                "horizon", "out", "self_loops", "scale", "by", "strict", "jobs", "a"):
        if key in data:
            setattr(cfg, key, data[key])
    if "players" in data:
        cfg.players = parse_players(data["players"])
    if "sweep" in data:
        cfg.params = {k: (parse_players(v) if k == "players" else
                          [str(x) for x in v] if k == "protocol" else _floats(v))
                      for k, v in data["sweep"].items()}

    for key in _FLAG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)
    if getattr(args, "matrix", None):
        cfg.matrix = json.loads(args.matrix)
        cfg.iterated = not args.direct
    if getattr(args, "strategies", None):
        cfg.strategies = [s.strip() for s in args.strategies.split(",") if s.strip()]
    if getattr(args, "players", None):
        cfg.players = parse_players(args.players)
    if getattr(args, "init", None):
        cfg.init = [int(v) for v in args.init.split(",")]
    if getattr(args, "self_loops", False):
        cfg.self_loops = True
    if getattr(args, "strict", False):
        cfg.strict = True
    if getattr(args, "param", None):
        cfg.params.update(_parse_params(args.param))

    if cfg.matrix is None and cfg.game.lower().replace("-", "_") not in presets.PRESETS:
        raise ConfigError(f"unknown game preset {cfg.game!r}; choose from {list(presets.PRESETS)}")
    if cfg.rounds is None or int(cfg.rounds) <= 0:
        raise ConfigError(f"rounds must be positive, got {cfg.rounds}")
    cfg.spec()  # validates protocol and eta
    return cfg


def _out_dir(cfg: RunConfig, name: str, multi: bool) -> Path:
    if cfg.out:
        return Path(cfg.out) / name if multi else Path(cfg.out)
    return Path(os.environ.get(OUT_ENV, "runs")) / name


def _write_json(path: Path, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def cmd_build_b(cfg: RunConfig) -> int:
    meta = cfg.meta_game()
    out = _out_dir(cfg, cfg.run_name(0).rsplit("_N", 1)[0] + "_b", False)
    out.mkdir(parents=True, exist_ok=True)
    meta.to_csv(out / "b_matrix.csv")
    _write_json(out / "run_metadata.json", {"game": meta.provenance if isinstance(meta.provenance, dict) else "direct",
                                            "strategies": list(meta.names), **cfg.metadata()})
    width = max(len(f"{v:g}") for v in meta.b.flat)
    for name, row in zip(meta.names, meta.b):
        print(f"{name:>20s} " + " ".join(f"{v:>{width}g}" for v in row))
    return 0


def _analysis(cfg: RunConfig, n: int, solve: bool) -> RunArtifacts:
    art = analyze(cfg.meta_game(), n, cfg.spec(), solve=solve)
    art.metadata.update(cfg.metadata())
    return art


def _summary(art: RunArtifacts) -> str:
    absorbing = [art.space.states[i] for i in art.cls.absorbing_states]
    larger = sum(1 for c in art.cls.recurrent_classes if len(c) > 1)
    return (f"N={art.space.n_players} states={len(art.space)} absorbing={absorbing} "
            f"larger_recurrent_classes={larger} transient={len(art.cls.transient)}")


def _chain_files(cfg, art, out: Path, with_absorption: bool):
    out.mkdir(parents=True, exist_ok=True)
    art.space.to_csv(out / "states.csv")
    art.meta.to_csv(out / "b_matrix.csv")
    art.p.to_csv(out / "transitions.csv")
    if with_absorption:
        from .solver import absorption_to_csv
        absorption_to_csv(art.result, art.colours, out / "absorption.csv")
    _write_json(out / "run_metadata.json", run_metadata(art))


def cmd_chain(cfg: RunConfig, absorb: bool = False) -> int:
    multi = len(cfg.players) > 1
    for n in cfg.players:
        art = _analysis(cfg, n, solve=absorb)
        out = _out_dir(cfg, cfg.run_name(n), multi)
        _chain_files(cfg, art, out, absorb)
        print(f"{_summary(art)} -> {out}")
    return 0


def cmd_stg(cfg: RunConfig) -> int:
    multi = len(cfg.players) > 1
    for n in cfg.players:
        art = _analysis(cfg, n, solve=True)
        out = _out_dir(cfg, cfg.run_name(n), multi)
        export_all(art, out, self_loops=cfg.self_loops, scale=cfg.scale)
        print(f"{_summary(art)} -> {out}")
    return 0


def cmd_simulate(cfg: RunConfig) -> int:
    multi = len(cfg.players) > 1
    for n in cfg.players:
        art = _analysis(cfg, n, solve=False)
        m = art.meta.m_strategies
        start = tuple(cfg.init) if cfg.init else balanced_start(n, m)
        if len(start) != m or sum(start) != n or min(start) < 0:
            raise ConfigError(f"--init {start} is not a state with N={n}, M={m}")
        out = _out_dir(cfg, cfg.run_name(n), multi)
        out.mkdir(parents=True, exist_ok=True)
        traj = simulate(art.p, start, cfg.generations, cfg.seed)
        traj.to_csv(out / "trajectory.csv")
        extra = {"start": list(start), "generations": cfg.generations, "seed": traj.seed}
        if cfg.runs:
            batch = batch_absorption(art.p, art.cls, start, cfg.runs, cfg.horizon, cfg.seed)
            extra["batch"] = {
                "runs": batch.runs,
                "horizon": cfg.horizon,
                "not_absorbed": batch.not_absorbed,
                "classes": [[list(art.space.states[i]) for i in c] for c in art.cls.recurrent_classes],
                "counts": batch.counts.tolist(),
            }
        _write_json(out / "run_metadata.json", run_metadata(art, extra))
        print(f"N={n} start={start} end={traj.states[-1]} -> {out}")
    return 0


def cmd_check_props(cfg: RunConfig) -> int:
    meta = cfg.meta_game()
    base = cfg.out or os.path.join(os.environ.get(OUT_ENV, "runs"), "check_props")
    out = Path(base)
    out.mkdir(parents=True, exist_ok=True)
    failed = False
    reports = []
    for n in cfg.players:
        r1 = checker.check_prop1(n, cfg.rounds, meta, by=cfg.by)
        r2 = checker.check_prop2(n, cfg.rounds, meta)
        print(r1.to_text().splitlines()[0])
        s2_bad = [v for v in r2.violations if v["state"]]
        print(f"proposition 2  N={n}  absorbing set "
              f"{'matches' if r2.metadata['absorbing_set_matches'] else 'DIFFERS'}  "
              f"S1uS2 states with P(green) > {checker.GREEN_TOL:g}: {len(s2_bad)} (recorded)")
        for v in s2_bad:
            print(f"    state={tuple(v['state'])} P(green)={v['observed']}")
        failed |= not r1.passed or not r2.metadata["absorbing_set_matches"]
        (out / f"prop2_findings_N{n}.csv").write_text(checker.findings_csv(r2), encoding="utf-8")
        (out / f"prop1_violations_N{n}.csv").write_text(r1.violations_csv(), encoding="utf-8")
        (out / f"prop2_violations_N{n}.csv").write_text(r2.violations_csv(), encoding="utf-8")
        reports.extend([r1.to_dict(), r2.to_dict()])
    _write_json(out / "reports.json", reports)
    (out / "reports.txt").write_text(
        "\n".join(checker.PropositionReport(**{k: v for k, v in r.items() if k != "passed"}).to_text()
                  for r in reports) + "\n", encoding="utf-8")
    return 1 if (failed and cfg.strict) else 0


def _sweep_one(cfg: RunConfig):
    n = cfg.players[0]
    art = _analysis(cfg, n, solve=True)
    out = Path(cfg.out)
    export_all(art, out, self_loops=cfg.self_loops, scale=cfg.scale)
    green = art.result.pure_rgb[:, 1] if art.space.m_strategies > 1 else []
    return cfg.run_name(n), _summary(art), int((green > 0.5).sum())


def sweep_bindings(cfg: RunConfig) -> list[RunConfig]:
    p = cfg.params
    axes = {
        "a": p.get("a", [cfg.a]),
        "players": p.get("players", cfg.players),
        "protocol": p.get("protocol", [cfg.protocol]),
        "eta": p.get("eta", [cfg.eta]),
    }
    root = Path(cfg.out or os.path.join(os.environ.get(OUT_ENV, "runs"), "sweep"))
    out, seen = [], set()
    for a, n, proto, eta in itertools.product(*axes.values()):
        is_logit = proto.lower() == "logit"
        binding = replace(cfg, a=a, players=[n], protocol=proto,
                          eta=eta if is_logit else None, params={})
        name = binding.run_name(n)
        if name in seen:
            continue
        seen.add(name)
        binding.out = str(root / name)
        binding.spec()
        out.append(binding)
    return out


def cmd_sweep(cfg: RunConfig) -> int:
    bindings = sweep_bindings(cfg)
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_sweep_one, bindings))
    else:
        results = [_sweep_one(b) for b in bindings]
    for name, summary, green in results:
        print(f"{name}: {summary} green_basin={green}")
    return 0


COMMANDS = {
    "build-b": cmd_build_b,
    "chain": cmd_chain,
    "absorb": lambda cfg: cmd_chain(cfg, absorb=True),
    "simulate": cmd_simulate,
    "stg": cmd_stg,
    "check-props": cmd_check_props,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="egchain", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--game", help="preset: ipd | stag_hunt | rps")
    common.add_argument("--matrix", help="inline base-game matrix as JSON, e.g. '[[3,1],[4,2]]'")
    common.add_argument("--direct", action="store_true",
                        help="use --matrix as the meta-game itself (one-shot game)")
    common.add_argument("--a", type=float, help="mutual-cooperation payoff A[0][0]")
    common.add_argument("--strategies", help="comma-separated strategy names")
    common.add_argument("--rounds", type=int, help="rounds T of the iterated game")
    common.add_argument("--players", help="N, a list '3,5' or a range '3..15'")
    common.add_argument("--protocol", help="br | ppc | pc | cap | logit")
    common.add_argument("--eta", type=float, help="logit noise parameter")
    common.add_argument("--out", help="output directory")

    sub.add_parser("build-b", parents=[common], help="write the meta-game matrix")
    sub.add_parser("chain", parents=[common], help="transition matrix and state classes")
    sub.add_parser("absorb", parents=[common], help="chain plus absorption probabilities")
    sim = sub.add_parser("simulate", parents=[common], help="seeded trajectory (and batch)")
    sim.add_argument("--generations", type=int)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--init", help="initial state s1,s2,s3")
    sim.add_argument("--runs", type=int, help="also run a Monte-Carlo absorption batch")
    sim.add_argument("--horizon", type=int, help="step cap per batch run")
    for name in ("stg", "sweep"):
        p = sub.add_parser(name, parents=[common],
                           help="full artifact set with DOT graph" if name == "stg"
                           else "full artifact set for every parameter binding")
        p.add_argument("--self-loops", action="store_true", help="draw self-loops in DOT")
        p.add_argument("--scale", type=float, help="DOT units per player")
        if name == "sweep":
            p.add_argument("--param", action="append",
                           help="binding list, e.g. a=3.0,3.2 or protocol=br,pc (repeatable)")
            p.add_argument("--jobs", type=int, help="parallel workers")
    chk = sub.add_parser("check-props", parents=[common], help="test propositions 1 and 2")
    chk.add_argument("--by", choices=["q", "Q"], help="best strategy by per-player q or total Q")
    chk.add_argument("--strict", action="store_true",
                     help="exit 1 on proposition 1 or absorbing-set violations")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    log.debug("kernel backend: %s", BACKEND)
    try:
        cfg = load_config(args)
        if args.command == "check-props":
            cfg.meta_game()
            if cfg.matrix is None and cfg.game.lower() != "ipd":
                raise ConfigError("check-props applies to the ipd preset")
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"egchain: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
