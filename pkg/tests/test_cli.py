import os
import subprocess
import sys

import pytest
import yaml

from riemfourier.cli import main
from riemfourier.experiments import read_report

SMALL = """
seed: 1
experiments:
  - id: sphere-lap
    manifold: {name: sphere2}
    operator: {name: laplace_beltrami}
    section: {name: cos_theta}
    base_points: [[1.0, 1.0], [2.0, 2.0]]
    plan: {N: 32, steps: 64, epsilon_cap: 0.6}
    tolerance: 1.0e-2
  - id: torus-grad
    manifold: {name: flat_torus}
    operator: {name: nabla, params: {eta: [1.0, 0.0]}}
    section: {name: plane_wave, params: {k: [1, 0]}}
    base_points: [[0.0, 0.0]]
    plan: {N: 32, steps: 16}
    tolerance: 1.0e-1
"""


@pytest.fixture
def config(tmp_path):
    path = tmp_path / "small.yaml"
    path.write_text(SMALL)
    return path


def test_verify_ok(config, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["verify", "--config", str(config), "--out", str(out)]) == 0
    assert "verify: ok" in capsys.readouterr().out
    rows = read_report(out / "verify.csv")
    assert len(rows) == 3
    assert (out / "verify_timings.csv").exists()
    summary = yaml.safe_load((out / "verify_summary.yaml").read_text())
    assert summary["sphere-lap"]["rows"] == 2


def test_verify_tolerance_override(config, tmp_path, capsys):
    code = main(["verify", "--config", str(config), "--out", str(tmp_path / "o"), "--tolerance", "1e-14"])
    assert code == 1
    assert "VIOLATION" in capsys.readouterr().out


def test_unknown_manifold(tmp_path, capsys):
    path = tmp_path / "bad.yaml"
    path.write_text(SMALL.replace("flat_torus", "mobius_strip"))
    assert main(["verify", "--config", str(path), "--out", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert "experiments[1].manifold" in err
    assert not (tmp_path / "o").exists()


def test_missing_and_malformed_config(tmp_path):
    assert main(["verify", "--config", str(tmp_path / "nope.yaml")]) == 2
    path = tmp_path / "bad.yaml"
    path.write_text("experiments: [\n")
    assert main(["verify", "--config", str(path)]) == 2


def test_bad_worker_env(config, tmp_path, monkeypatch):
    monkeypatch.setenv("RIEMFOURIER_WORKERS", "-1")
    assert main(["verify", "--config", str(config), "--out", str(tmp_path)]) == 2


def test_props_fault(tmp_path, capsys):
    path = tmp_path / "p.yaml"
    path.write_text("seed: 2\nprops:\n  manifolds: [{name: sphere2}]\n"
                    "  samples: {semigroup: 2, symmetrized_derivative: 1, transport_isometry: 2,"
                    " metric_compatibility: 2, inversion_linearity: 1, frame_independence: 1}\n")
    args = ["props", "--config", str(path), "--out", str(tmp_path / "o")]
    assert main(args) == 0
    assert main(args + ["--inject-fault", "corrupt_christoffel"]) == 1
    assert "VIOLATION metric_compatibility" in capsys.readouterr().out


def test_module_entry_point_deterministic(config, tmp_path):
    outs = []
    for workers in ("1", "2"):
        out = tmp_path / f"w{workers}"
        env = dict(os.environ, RIEMFOURIER_WORKERS=workers)
        proc = subprocess.run([sys.executable, "-m", "riemfourier", "verify", "--config", str(config),
                               "--out", str(out)], env=env, capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        outs.append((out / "verify.csv").read_bytes())
    assert outs[0] == outs[1]
