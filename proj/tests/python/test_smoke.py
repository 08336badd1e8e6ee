import json
import os
import shutil
import subprocess

import pytest

import lambda_asg as la

PAIR = {
    "lambda_minus": {"atoms": [[0.25, 0.5], [0.5, 0.5]]},
    "lambda_plus": {"atoms": [[0.5, 1 / 3], [0.75, 1 / 3], [1.0, 1 / 3]]},
}
SELECTIVE = [(0.3, 0.2, 0.6), (0.6, 0.1, 0.4)]


def test_quantile_coupling_example():
    atoms = la.quantile_coupling([(0.25, 0.5), (0.5, 0.5)], [(0.5, 1 / 3), (0.75, 1 / 3), (1.0, 1 / 3)])
    masses = {(round(y, 12), round(z, 12)): m for y, z, m in atoms}
    assert masses[(0.25, 0.25)] == pytest.approx(1 / 3)
    assert masses[(0.5, 0.25)] == pytest.approx(1 / 6)
    assert la.transport_cost(atoms) == pytest.approx(5 / 32, abs=1e-15)


def test_order_violation_is_a_validation_error():
    with pytest.raises(la.ValidationError):
        la.quantile_coupling([(0.75, 1.0)], [(0.5, 1.0)])
    report = la.stochastic_order([(0.75, 1.0)], [(0.5, 1.0)])
    assert not report["holds"]
    assert report["witness"] == 0.75


def test_generator_and_absorption():
    q = la.generator_matrix(10, SELECTIVE)
    assert q.shape == (11, 11)
    assert abs(q.sum(axis=1)).max() < 1e-10
    h = la.absorption_probability(50, [(0.4, 0.0, 1.0)])
    assert h[25] == pytest.approx(0.5, abs=1e-10)


def test_dualities():
    assert la.generator_duality_check(10, SELECTIVE) < 1e-10
    assert la.limit_generator_duality(SELECTIVE) < 1e-10
    rep = la.pathwise_duality_check(8, SELECTIVE, 1.0, 2, 0.5, 5000, seed=3)
    assert abs(rep["z"]) < 4
    # sampling function C(2,2)/C(4,2)
    assert la.sampling_function(4, 2, 2) == pytest.approx(1 / 6)


def test_rates():
    coalesce, branch = la.limit_chain_rates([(0.25, 0.25, 1.0)], 1)
    assert branch == pytest.approx(0.25)
    _, branch = la.line_count_rates(6, [(0.5, 0.0, 1.0)], 3)
    assert branch == 0.0


def test_fixation():
    sol = la.solve_fixation([(0.5, 0.05, 1.0)], grid=11)
    assert not sol["neutral"]
    assert sol["p"][0] == 0.0
    assert sol["p"][-1] == pytest.approx(1.0, abs=1e-9)
    assert all(p <= x + 1e-12 for x, p in zip(sol["x"], sol["p"]))
    neutral = la.solve_fixation([(0.5, 0.0, 1.0)], grid=11)
    assert neutral["neutral"] and neutral["warnings"]


def test_sde_paths_stay_in_unit_interval():
    times, values = la.simulate_sde(SELECTIVE, 0.5, 5.0, seed=1)
    assert len(times) == len(values)
    assert all(0.0 <= v <= 1.0 for v in values)


def test_run_experiment(tmp_path):
    code, log = la.run_experiment(
        {"experiment": "duality_matrix", "measures": PAIR, "params": {"N": 10}}, output_dir=str(tmp_path)
    )
    assert code == 0, log
    residual = json.loads((tmp_path / "residual.json").read_text())
    assert residual["residual"] < 1e-10
    assert (tmp_path / "manifest.json").exists()
    code, log = la.run_experiment({"experiment": "nope", "measures": PAIR})
    assert code == 1
    assert "duality_matrix" in log


def test_check_measures():
    assert la.check_measures({"measures": PAIR})["atoms"] == 4
    bad = la.check_measures({"measures": {"coupling": {"atoms": [[0.7, 0.5, 1.0]]}}})
    assert not bad["valid"]


def _cli():
    return os.environ.get("LAMBDA_ASG_CLI") or shutil.which("lambda-asg")


@pytest.mark.skipif(_cli() is None, reason="command-line tool not built")
def test_cli_run_and_check(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"experiment": "coupling_report", "measures": PAIR}))
    out = tmp_path / "out"
    env = dict(os.environ, LAMBDA_ASG_THREADS="2")
    run = subprocess.run([_cli(), "run", str(cfg), "--output-dir", str(out), "--seed", "9"], env=env,
                         capture_output=True, text=True)
    assert run.returncode == 0, run.stderr
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 9
    assert manifest["threads"] == 2
    check = subprocess.run([_cli(), "check", str(cfg)], capture_output=True, text=True)
    assert check.returncode == 0
    assert json.loads(check.stdout)["valid"]

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"measures": {"lambda_minus": PAIR["lambda_plus"], "lambda_plus": PAIR["lambda_minus"]}}))
    check = subprocess.run([_cli(), "check", str(bad)], capture_output=True, text=True)
    assert check.returncode == 1
    assert json.loads(check.stdout)["order"]["witness"] == 0.75
