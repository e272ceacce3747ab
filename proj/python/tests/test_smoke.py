import math

import pytest

import xlayer


@pytest.fixture(scope="module")
def inst():
    return xlayer.generate(nodes=10, seed=3)


def test_generate_is_deterministic(inst):
    again = xlayer.generate(nodes=10, seed=3)
    assert again["network"] == inst["network"]
    assert len(inst["positions"]) == 10


def test_evaluate_min_hop_start(inst):
    state = xlayer.min_hop_route(inst["network"])
    assert state == inst["initial"]
    ev = xlayer.evaluate(inst["network"], state)
    assert ev["finite"] and ev["cost"] > 0


def test_run_descends(inst):
    tr = xlayer.run(inst["network"], inst["initial"], {"rt": "brt", "pa": "bpa", "pc": True, "max_iterations": 40})
    costs = [r["cost"] for r in tr["records"]]
    assert costs[-1] < costs[0]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(costs, costs[1:]))


def test_noisy_run_is_reproducible(inst):
    ch = {"noise": 0.5, "staleness": "cached", "seed": 4}
    a = xlayer.run(inst["network"], inst["initial"], {"max_iterations": 15}, ch)
    b = xlayer.run(inst["network"], inst["initial"], {"max_iterations": 15}, ch)
    assert a == b


def test_check_passes(inst):
    rep = xlayer.check(inst["network"], inst["initial"], trials=10)
    assert rep["passed"]
    assert rep["hessian_violations"] == 0


def test_projection_example():
    x = xlayer.project_simplex([0.8, 0.6], [1.0, 1.0])
    assert x == pytest.approx([0.6, 0.4])
    assert math.isclose(sum(xlayer.project_simplex([3.0, -1.0, 0.2], [1.0, 2.0, 0.5])), 1.0)


def test_compare_small():
    summary, csv, seeds = xlayer.compare(
        {"name": "t", "instance": {"nodes": 8}, "num_seeds": 2, "iterations": 5,
         "arms": [{"name": "aodv", "algorithm": {"rt": "off", "pa": "off"}},
                  {"name": "brt", "algorithm": {"rt": "brt", "pa": "off"}}]}
    )
    assert csv.splitlines()[0].startswith("iteration,aodv_cost")
    assert len(csv.splitlines()) == 7
    assert len(seeds.splitlines()) >= 3


def test_errors_carry_kind():
    with pytest.raises(xlayer.XlayerError) as e:
        xlayer.generate(nodes=8, radius=0.01, max_retries=1)
    assert e.value.kind == "ConnectivityFailure"
