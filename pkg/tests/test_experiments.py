import math

import numpy as np
import pytest
import yaml

from riemfourier.errors import ConfigError, ReportIntegrityError
from riemfourier.experiments import (
    parse_suite,
    read_report,
    run_breakdown_demo,
    run_convergence,
    run_property_suite,
    run_verify,
    worker_count,
    write_report,
)


def small_suite(**overrides):
    exp = {
        "id": "sphere-lap",
        "manifold": {"name": "sphere2"},
        "operator": {"name": "laplace_beltrami"},
        "section": {"name": "cos_theta"},
        "base_points": [[1.0, 1.0], [2.0, 0.5]],
        "plan": {"N": 32, "steps": 64, "epsilon_cap": 0.6},
        "tolerance": 1e-2,
    }
    exp.update(overrides)
    return {"seed": 3, "experiments": [exp]}


def vector_exp():
    return {
        "id": "vec",
        "manifold": {"name": "sphere2"},
        "operator": {"name": "nabla", "params": {"eta": [1.0, 0.5]}},
        "section": {"name": "random_trig", "params": {"contravariant": 1}},
        "base_points": [[1.3, 2.0]],
        "plan": {"N": 32, "steps": 64, "epsilon_cap": 0.6},
        "tolerance": 1e-1,
    }


# config parsing

@pytest.mark.parametrize("patch, path", [
    ({"manifold": {"name": "klein_bottle"}}, "experiments[0].manifold"),
    ({"plan": {"N": 33}}, "experiments[0].plan.N"),
    ({"plan": {"steps": 2}}, "experiments[0].plan.steps"),
    ({"plan": {"stencil": 3}}, "experiments[0].plan.stencil"),
    ({"plan": {"colour": 1}}, "experiments[0].plan.colour"),
    ({"base_points": [[1.0, 1.0], [0.05, 1.0]]}, "experiments[0].base_points[1]"),
    ({"base_points": [[1.0]]}, "experiments[0].base_points[0]"),
    ({"sweeps": {"N": [32, 31]}}, "experiments[0].sweeps.N[1]"),
    ({"operator": {"name": "curl"}}, "experiments[0].operator.name"),
])
def test_config_error_paths(patch, path):
    with pytest.raises(ConfigError) as info:
        parse_suite(small_suite(**patch))
    assert info.value.path == path


def test_config_numbers_from_strings():
    suite = parse_suite(small_suite(tolerance="1e-3"))
    assert suite.experiments[0].tolerance == 1e-3


def test_config_overrides():
    suite = parse_suite(small_suite(), seed=11, tolerance=0.5)
    assert suite.seed == 11
    assert suite.experiments[0].tolerance == 0.5


def test_duplicate_ids():
    raw = small_suite()
    raw["experiments"].append(dict(raw["experiments"][0]))
    with pytest.raises(ConfigError):
        parse_suite(raw)


def test_worker_env(monkeypatch):
    monkeypatch.setenv("RIEMFOURIER_WORKERS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("RIEMFOURIER_WORKERS", "zero")
    with pytest.raises(ConfigError):
        worker_count()


# runs

def test_verify_rows_and_summary():
    raw = small_suite()
    raw["experiments"].append(vector_exp())
    report = run_verify(parse_suite(raw), workers=1)
    assert [r.key for r in report.rows] == [("sphere-lap", 0, 32, 64), ("sphere-lap", 1, 32, 64), ("vec", 0, 32, 64)]
    assert report.exit_code == 0
    assert report.rows[2].value_inverted.shape == (2,)
    assert report.summary["sphere-lap"]["max_rel_error"] < 1e-2


def test_verify_order_three_row_continues():
    raw = small_suite()
    raw["experiments"][0]["operator"] = {"name": "nabla3", "params": {"etas": [[1, 0], [0, 1], [0, 1]]}}
    raw["experiments"].append(vector_exp())
    report = run_verify(parse_suite(raw), workers=1)
    bad = [r for r in report.rows if r.experiment == "sphere-lap"]
    assert all(r.error.startswith("OrderTooHigh") for r in bad)
    assert all(math.isnan(r.rel_error) for r in bad)
    assert [r for r in report.rows if r.experiment == "vec"][0].ok
    assert report.exit_code == 1
    assert any("OrderTooHigh" in v for v in report.violations)


def test_verify_tolerance_violation():
    report = run_verify(parse_suite(small_suite(tolerance=1e-12)), workers=1)
    assert report.exit_code == 1
    assert len(report.violations) == 2


def test_convergence_shape():
    raw = small_suite(sweeps={"N": [16, 32], "steps": [16, 32], "fixed_N": 32, "fixed_steps": 64},
                      base_points=[[1.0, 1.0]])
    report = run_convergence(parse_suite(raw), workers=1)
    keys = {(r.N, r.steps) for r in report.rows}
    assert keys == {(16, 64), (32, 64), (32, 16), (32, 32)}
    s = report.summary["sphere-lap"]
    assert len(s[0]["N_sweep"]["abs_error"]) == 2
    assert len(s[0]["steps_sweep"]["orders"]) == 1


def test_breakdown_flags_small_discrepancy():
    raw = small_suite(base_points=[[1.0, 1.0]], min_discrepancy=1e-2)
    report = run_breakdown_demo(parse_suite(raw), workers=1)
    # the Laplacian is inverted exactly up to discretisation, so there is no breakdown to show
    assert report.exit_code == 1


# CSV

def test_csv_round_trip(tmp_path):
    raw = small_suite()
    raw["experiments"].append(vector_exp())
    rows = run_verify(parse_suite(raw), workers=1).rows
    path = tmp_path / "r.csv"
    write_report(rows, path)
    back = read_report(path)
    for a, b in zip(rows, back):
        assert a.key == b.key and a.x == b.x
        assert np.array_equal(a.value_inverted, b.value_inverted)
        assert np.array_equal(a.value_direct, b.value_direct)
        assert a.abs_error == b.abs_error and a.rel_error == b.rel_error


def test_csv_tamper_detected(tmp_path):
    rows = run_verify(parse_suite(small_suite()), workers=1).rows
    path = tmp_path / "r.csv"
    write_report(rows, path)
    text = path.read_text()
    stored = repr(rows[0].abs_error)
    path.write_text(text.replace(stored, repr(rows[0].abs_error * 0.5), 1))
    with pytest.raises(ReportIntegrityError):
        read_report(path)


def test_csv_error_rows_round_trip(tmp_path):
    raw = small_suite(operator={"name": "nabla3", "params": {"etas": [[1, 0], [0, 1], [0, 1]]}})
    rows = run_verify(parse_suite(raw), workers=1).rows
    write_report(rows, tmp_path / "r.csv")
    back = read_report(tmp_path / "r.csv")
    assert back[0].error.startswith("OrderTooHigh")


def test_parallel_matches_serial(tmp_path):
    raw = small_suite()
    raw["experiments"].append(vector_exp())
    suite = parse_suite(raw)
    write_report(run_verify(suite, workers=1).rows, tmp_path / "a.csv")
    write_report(run_verify(suite, workers=2).rows, tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


# property suite

def props_suite(seed=0):
    return parse_suite({"seed": seed, "props": {
        "manifolds": [{"name": "sphere2"}],
        "samples": {"semigroup": 3, "symmetrized_derivative": 2, "transport_isometry": 3,
                    "metric_compatibility": 3, "inversion_linearity": 1, "frame_independence": 1},
    }})


def test_props_pass_and_reproduce():
    a = run_property_suite(props_suite(5), workers=1)
    b = run_property_suite(props_suite(5), workers=1)
    assert a.exit_code == 0
    assert a.summary["failures"] == 0
    assert yaml.safe_dump(a.summary) == yaml.safe_dump(b.summary)


def test_props_fault_injection():
    report = run_property_suite(props_suite(), workers=1, fault="corrupt_christoffel")
    failed = {r["check"] for r in report.summary["results"] if r["failures"]}
    assert {"metric_compatibility", "holonomy"} <= failed
    assert report.exit_code == 1
