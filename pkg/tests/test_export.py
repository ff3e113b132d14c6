import json
import re

import pytest

from egchain import presets
from egchain.export import export_all, node_id, to_dot
from egchain.pipeline import analyze
from egchain.revision import ProtocolSpec

BR = ProtocolSpec.parse("br")
NODE = re.compile(r'^  (s_\d+_\d+_\d+) \[pos="([\d.]+),([\d.]+)!", style=filled, fillcolor="(#[0-9A-F]{6})"\];$')
EDGE = re.compile(r'^  (s_\d+_\d+_\d+) -> (s_\d+_\d+_\d+) \[label="(\d\.\d{4})"\];$')


def parse_dot(text):
    """Minimal parser for the subset of DOT that to_dot emits."""
    lines = text.splitlines()
    assert lines[0] == "digraph stg {" and lines[-1] == "}"
    nodes, edges = {}, []
    for line in lines[1:-1]:
        if m := NODE.match(line):
            nodes[m[1]] = (float(m[2]), float(m[3]), m[4])
        elif m := EDGE.match(line):
            edges.append((m[1], m[2], float(m[3])))
        else:
            assert re.match(r"^  (graph|node|edge) \[.*\];$", line), line
    assert all(a in nodes and b in nodes for a, b, _ in edges)
    return nodes, edges


def test_ipd_n3_dot():
    art = analyze(presets.meta_game("ipd"), 3, BR)
    nodes, edges = parse_dot(to_dot(art.p, art.colours))
    assert len(nodes) == 10
    assert nodes["s_3_0_0"] == (3.0, 0.0, "#FF0000")
    assert nodes["s_0_0_3"][2] == "#0000FF"
    assert not [e for e in edges if e[0] == "s_3_0_0"]
    assert ("s_2_1_0", "s_1_2_0", 0.6667) in edges
    loops = parse_dot(to_dot(art.p, art.colours, self_loops=True))[1]
    assert ("s_3_0_0", "s_3_0_0", 1.0) in loops


def test_single_player_graph_has_no_edges():
    art = analyze(presets.meta_game("ipd"), 1, BR)
    nodes, edges = parse_dot(to_dot(art.p, art.colours))
    assert len(nodes) == 3 and edges == []


def test_scale_and_positions():
    art = analyze(presets.meta_game("rps"), 4, BR)
    nodes, _ = parse_dot(to_dot(art.p, art.colours, scale=2.5))
    assert nodes["s_1_3_0"][:2] == (2.5, 7.5)


def test_rps_dot_invariant_under_rotation():
    art = analyze(presets.meta_game("rps"), 6, BR)
    nodes, edges = parse_dot(to_dot(art.p, art.colours))

    def rho(name):
        s1, s2, s3 = map(int, name.split("_")[1:])
        return node_id((s3, s1, s2))

    assert {(rho(a), rho(b), p) for a, b, p in edges} == set(edges)


def test_edge_mass_reconstructs_rows():
    art = analyze(presets.meta_game("stag_hunt"), 8, ProtocolSpec.parse("pc"))
    _, edges = parse_dot(to_dot(art.p, art.colours, self_loops=True))
    out = {}
    for a, _, p in edges:
        out[a] = out.get(a, 0) + p
    # labels carry 4 decimals; at most 7 edges per node
    assert all(abs(v - 1) <= 7 * 5e-5 for v in out.values())


def test_export_all_files(tmp_path):
    art = analyze(presets.meta_game("ipd"), 15, BR)
    files = export_all(art, tmp_path)
    names = {f.name for f in files}
    assert names == {"states.csv", "b_matrix.csv", "transitions.csv", "absorption.csv",
                     "stg.dot", "run_metadata.json"}
    assert len((tmp_path / "states.csv").read_text().splitlines()) == 137
    meta = json.loads((tmp_path / "run_metadata.json").read_text())
    assert meta["n_players"] == 15 and meta["rounds"] == 1000 and meta["protocol"] == "br"
    assert meta["prng"].startswith("xoshiro256**")
    header = (tmp_path / "absorption.csv").read_text().splitlines()[0]
    assert header == "state_index,class_0,class_1,class_2,r,g,b"
    # transitions.csv round-trips to row sums of one
    sums = {}
    for line in (tmp_path / "transitions.csv").read_text().splitlines()[1:]:
        i, _, p = line.split(",")
        sums[i] = sums.get(i, 0) + float(p)
    assert len(sums) == 136 and all(abs(v - 1) <= 1e-9 for v in sums.values())
    for f in files:
        assert b"\r\n" not in f.read_bytes()
