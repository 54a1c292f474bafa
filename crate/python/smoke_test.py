"""Smoke test for the tdaguard extension module.

Build and install first:
    maturin build -m crates/py/Cargo.toml --release -o dist
    pip install dist/tdaguard-*.whl
"""

import json
import pathlib
import sys

import tdaguard

DATA = pathlib.Path(__file__).resolve().parent.parent / "crates" / "core" / "data"


def main():
    s = tdaguard.Scenario.load(str(DATA / "seven-node-attack-ac.json"))
    assert s.source == "S" and s.destination == "F", s
    assert s.malicious == ["A", "C"], s.malicious

    g = s.build()
    assert g.vertex_count == 22, g.vertex_count
    weight, path = s.without_attack().build().shortest_path("S^1", "F")
    assert weight == 89.0 and path[-1] == "F^7", (weight, path)

    trace = g.simulate()
    assert trace.delivered
    assert [t for _, t in trace.receptions()] == [0, 6, 31, 36, 61, 117, 151]

    for mode in ("global", "local"):
        r = tdaguard.detect(g, trace, mode)
        assert r.flagged == ["A", "C"], (mode, r)
        assert json.loads(r.to_json())["mode"] == mode

    benign = s.without_attack().build()
    assert tdaguard.detect(benign, benign.simulate()).flagged == []

    one = s.with_attack({"A": 5}).build()
    assert tdaguard.detect(one, one.simulate()).flagged == ["A"]

    assert abs(tdaguard.eor("hotd", [5]) - 0.225) < 1e-12
    assert abs(tdaguard.eor("hotd", [7]) / tdaguard.eor("global", [7]) - 5.25) < 1e-9

    gen = tdaguard.Scenario.generate("table2-row3", 11)
    assert gen.to_json() == tdaguard.Scenario.generate("table2-row3", 11).to_json()
    assert len(gen.nodes) == 15

    try:
        tdaguard.Scenario.from_json('{"nodes": []}')
    except ValueError as e:
        print("rejected bad scenario:", e)
    else:
        sys.exit("bad scenario accepted")

    print("smoke test ok")


if __name__ == "__main__":
    main()
