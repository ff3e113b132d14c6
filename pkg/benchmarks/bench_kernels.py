"""Compare the compiled and pure-Python kernels on the three hot loops.

    python benchmarks/bench_kernels.py --players 60 --mc-players 12 --runs 500

Monte-Carlo runs stay at small N: IPD/BR runs that reach the AllC/TFT edge
need about 2**N generations to absorb.
"""
import argparse
import sys
import timeit

import numpy as np

from egchain import _backend, presets
from egchain.chain import build_transition_matrix, classify_states
from egchain.revision import Protocol, ProtocolSpec
from egchain.population import enumerate_states
from egchain.solver import _banded_system


def _chain(meta, n):
    space = enumerate_states(n, 3)
    p = build_transition_matrix(space, meta, ProtocolSpec.parse("br"))
    cls = classify_states(p)
    return space, p, cls, np.asarray(cls.labels, dtype=np.int64)


def cases(n, n_mc, runs, horizon):
    meta = presets.meta_game("ipd")
    b = np.ascontiguousarray(meta.b)
    space, p, cls, labels = _chain(meta, n)
    transient = np.array(cls.transient, dtype=np.int64)
    band, lbw, ubw, rhs, _ = _banded_system(p, transient, labels, len(cls.recurrent_classes))
    mc_space, mc_p, mc_cls, mc_labels = _chain(meta, n_mc)
    start = mc_space.index((n_mc // 3, n_mc // 3, n_mc - 2 * (n_mc // 3)))
    return {
        "transition_rows": lambda k: k.transition_rows(
            b, space.array, space.neighbors, int(Protocol.BR), 1.0),
        "batch_absorb": lambda k: k.batch_absorb(
            mc_p.indptr, mc_p.indices, mc_p.data, mc_labels, len(mc_cls.recurrent_classes),
            start, runs, horizon, 1),
        "absorb_banded": lambda k: k.absorb_banded(band, lbw, ubw, rhs),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--players", type=int, default=60)
    ap.add_argument("--mc-players", type=int, default=12)
    ap.add_argument("--runs", type=int, default=500)
    ap.add_argument("--horizon", type=int, default=10**7)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    if _backend.compiled_kernels is None:
        print("compiled extension not built; run `pip install -e . --no-build-isolation`",
              file=sys.stderr)
        return 1
    print(f"IPD/BR, chain N={args.players}, {args.runs} absorbing runs at N={args.mc_players}")
    print(f"{'kernel':<16}{'cython (s)':>12}{'python (s)':>12}{'speedup':>10}")
    for name, fn in cases(args.players, args.mc_players, args.runs, args.horizon).items():
        times = []
        for k in (_backend.compiled_kernels, _backend.python_kernels):
            times.append(min(timeit.repeat(lambda: fn(k), number=1, repeat=args.repeat)))
        print(f"{name:<16}{times[0]:>12.4f}{times[1]:>12.4f}{times[1] / times[0]:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
