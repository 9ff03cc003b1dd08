import json
import math

import pytest

import interlab


@pytest.fixture(scope="module")
def zd():
    return interlab.build_family("zd_box", radius=5)


def test_window_shape(zd):
    assert zd.window == 5
    assert zd.center == "0,0,0"
    assert zd.graph.num_vertices == 11**3
    assert len(zd.level(0)) == 1
    assert zd.shell("2,-1,0") == 2


def test_equilibrium_and_entry_law(zd):
    K = ["0,0,0", "1,0,0"]
    eq = interlab.equilibrium(zd, K, 4)
    assert eq["capacity"] == pytest.approx(sum(eq["measure"].values()))
    assert sum(eq["normalized"].values()) == pytest.approx(1.0)
    law = interlab.entry_measure_free(zd, 4, K, "4,4,4")
    assert sum(law.values()) == pytest.approx(1.0, abs=1e-9)


def test_free_resistance_dominates_wired(zd):
    free = interlab.effective_resistance(zd, "0,0,0", "1,0,0", 4, "free")
    wired = interlab.effective_resistance(zd, "0,0,0", "1,0,0", 4, "wired")
    assert free >= wired > 0.0


def test_samplers_are_seeded(zd):
    a = interlab.sample_interlacement(zd, ["0,0,0"], 2.0, seed=3)
    b = interlab.sample_interlacement(zd, ["0,0,0"], 2.0, seed=3)
    assert a == b
    for e in a:
        assert e["path"][e["root"]] == "0,0,0"
    steps, holds = interlab.sample_reflected(zd, 2, "wired", seed=1, excursions=4)
    # a marker before each excursion and one after the last exit
    assert steps[0] is None and steps[-1] is None
    assert sum(s is None for s in steps) == 5
    assert len(holds) == len(steps)


def test_forests(zd):
    edges = interlab.wilson(zd, 3, "free", seed=2)
    assert len(edges) == 7**3 - 1
    tree = interlab.build_family("regular_tree", radius=6)
    for _, _, p in interlab.panel_marginals(tree, 4, "free", 6):
        assert p == pytest.approx(1.0)


def test_errors_are_typed(zd):
    with pytest.raises(interlab.Error, match="invalid_argument|parse"):
        interlab.equilibrium(zd, ["nowhere"], 3)


def test_run_and_report(tmp_path):
    config = {"run.cmd": "graph", "run.seed": "1", "graph.radius": "3", "run.output": str(tmp_path)}
    r = interlab.run(config)
    assert r["artifacts"] == ["edges.csv", "levels.csv"]
    first = (r["directory"] / "edges.csv").read_text()
    assert first.startswith("# config_hash=" + interlab.config_hash(config))
    again = interlab.run(config)
    assert (again["directory"] / "edges.csv").read_text() == first
    with pytest.raises(interlab.Error, match="usage"):
        interlab.run({"run.cmd": "graph"})

    w = interlab.build_family("zd_box", radius=7)
    doc = interlab.equivalence_report(w, ["0,0,0", "1,0,0"], first_level=2, last_level=6, seed=5,
                                      entry_samples=1000)
    assert doc["verdict"] in {"consistent", "inconsistent", "inconclusive"}
    assert len(doc["diagnostics"]) == 3
    for d in doc["diagnostics"]:
        assert d["levels"] == [2, 3, 4, 5, 6]
        assert all(math.isfinite(v) for v in d["values"])
    assert doc["appendix_csv"].startswith("level,diagnostic,value\n")
    assert json.loads(json.dumps(doc)) == doc
