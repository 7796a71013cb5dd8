import math

import pytest

import crn_games as cg


def small_params(flows=10, seed=1):
    p = cg.ScenarioParams()
    p.n_flows = flows
    p.seed = seed
    return p


def test_defaults_and_link_budget():
    p = cg.ScenarioParams()
    assert p.n_nodes == 200
    assert p.q_levels == 16
    assert math.isclose(p.max_range(), 100.0, rel_tol=1e-12)
    assert math.isclose(cg.dbm_to_watts(20.0), 0.1, rel_tol=1e-12)


def test_generate_and_round_trip(tmp_path):
    sc = cg.generate_scenario(small_params())
    assert sc.n_nodes == 200
    assert sc.n_flows == 10
    route = sc.route(0)
    assert sc.shortest_route(route[0], route[-1]) == route
    path = tmp_path / "s.json"
    sc.save(str(path))
    back = cg.Scenario.load(str(path))
    assert back.to_json() == cg.Scenario.from_json(back.to_json()).to_json()
    assert [back.route(f) for f in range(10)] == [sc.route(f) for f in range(10)]


def test_parse_error_names_the_field():
    text = cg.generate_scenario(small_params(2, 4)).to_json().replace('"q_levels"', '"levels"')
    with pytest.raises(cg.ParseError, match="q_levels"):
        cg.Scenario.from_json(text)
    with pytest.raises(ValueError):
        cg.Scenario.from_json("{")


def test_run_game_pfg_converges():
    sc = cg.generate_scenario(small_params())
    r = cg.run_game(sc, "pfg")
    assert r["converged"]
    assert r["metrics"].game == cg.GameKind.PFG
    assert r["metrics"].flows_active <= 10
    assert len(r["final_profile"]) == sc.n_links
    assert r["trajectory_jsonl"].count("\n") == len(r["trajectory_jsonl"].splitlines())
    again = cg.run_game(sc, cg.GameKind.PFG)
    assert again["metrics"] == r["metrics"]


def test_unknown_game():
    sc = cg.generate_scenario(small_params())
    with pytest.raises(ValueError):
        cg.run_game(sc, "xyz")


def test_batch_csv_and_aggregate():
    rows, failures = cg.run_batch(small_params(), [5, 10], 2, games=["pfg", "clg"], master_seed=3, jobs=1)
    assert failures == []
    assert len(rows) == 2 * 2 * 2
    text = cg.metrics_to_csv(rows)
    assert text.splitlines()[0] == cg.RESULTS_HEADER
    assert cg.metrics_from_csv(text) == rows
    agg = cg.aggregate(rows)
    conv = [a for a in agg if a.metric == "converged" and a.game == cg.GameKind.PFG]
    assert all(a.mean == 1.0 for a in conv)
    assert cg.aggregate_to_csv(agg).splitlines()[0] == cg.AGGREGATE_HEADER
    rows2, _ = cg.run_batch(small_params(), [5, 10], 2, games=["pfg", "clg"], master_seed=3, jobs=2)
    assert cg.metrics_to_csv(rows2) == text


def test_oracle_on_tiny_instances():
    report = cg.verify_tiny_instances(3, 10)
    assert report["ok"], report["failures"]
    assert report["instances"] == 10
    sc = None
    for seed in range(50):
        try:
            sc = cg.generate_scenario(cg.tiny_params(seed, 2))
            break
        except cg.ScenarioError:
            continue
    assert sc is not None
    best, witness = cg.global_optimum(sc)
    assert 0 <= best <= 2
    assert len(witness) == sc.n_links


def test_scenario_error():
    p = small_params(1)
    p.n_nodes = 2
    raised = False
    for seed in range(5):
        p.seed = seed
        try:
            cg.generate_scenario(p)
        except cg.ScenarioError:
            raised = True
            break
    assert raised
