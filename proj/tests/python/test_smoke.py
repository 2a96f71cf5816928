import json
import math

import numpy as np
import pytest

import iemso


def test_definition_fixtures():
    avg, per_dim = iemso.pce(np.array([[0.0, 0.0], [0.5, 1.0]]), np.zeros(2), np.ones(2))
    assert abs(avg - 0.75) < 1e-12
    assert np.allclose(per_dim, [0.5, 1.0])
    assert abs(iemso.mdpe(np.array([[1.0, 0.0]]), np.array([[0.0, 0.0], [2.0, 0.0]]))[0] - 1.0) < 1e-12
    assert abs(iemso.abd(np.array([[1.0, 0.0], [0.0, 2.0]]), np.array([[0.0, 0.0]])) - 1.5) < 1e-12
    assert abs(iemso.hve(np.array([[1.0, 1.0], [2.0, 2.0]]), (3.0, 3.0)) - 5.0) < 1e-12
    assert abs(iemso.cr([10, 5, 5, 2.5]) - 1 / 3) < 1e-12
    assert abs(iemso.os([1.0, 3.0]) - 1.0) < 1e-12


def test_pareto_and_hypervolume():
    scores = np.array([[1.0, 2.0], [2.0, 1.0], [2.0, 2.0]])
    assert iemso.pareto_front(scores) == [0, 1]
    assert abs(iemso.hypervolume(scores[:2], (3.0, 3.0)) - 3.0) < 1e-12
    pre, post = iemso.chee(0, scores[:2], 1.5, (3.0, 3.0))
    assert abs(pre - 1.0) < 1e-12 and abs(post - 0.5) < 1e-12
    assert iemso.default_reference(np.array([[0.0, 0.0], [10.0, 2.0]])) == pytest.approx((11.0, 2.2))


def test_batch_diversity():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((2000, 1))
    assert abs(iemso.des(x) - 0.5 * math.log(2 * math.pi * math.e)) < 0.1
    assert iemso.dis(np.array([[0.3, 0.2]]))["det"] == pytest.approx(1.0)


def test_problem_and_errors():
    assert abs(iemso.evaluate("branin", np.array([[math.pi, 2.275]]))[0] - 0.397887) < 1e-5
    with pytest.raises(ValueError):
        iemso.evaluate("branin", np.zeros((1, 3)))


def test_gp_interpolates():
    x = np.array([[0.2], [0.7]])
    mean, sd = iemso.gp_predict(x, np.array([3.0, -1.0]), np.zeros(1), np.ones(1), x)
    assert np.allclose(mean, [3.0, -1.0], rtol=1e-3)


def test_run_analyze_report(tmp_path):
    out = tmp_path / "runs"
    results = iemso.run_experiment("branin", 2, iterations=3, runs=2, out=str(out))
    assert [r["evaluations_used"] for r in results] == [18, 18]
    records = iemso.read_trace(results[0]["trace"])
    assert len(records) == 4
    assert records[0]["metadata"]["problem"] == "branin"
    files = iemso.write_report(str(out))
    summary = json.loads((out / "summary.json").read_text())
    assert "os" in summary and any(f.endswith("metric_abd.csv") for f in files)

    csv = tmp_path / "export.csv"
    iemso.export_csv(results[0]["trace"], str(csv))
    warnings = iemso.analyze_csv(str(csv), str(tmp_path / "analysis"))
    assert any("no prior evaluations" in w for w in warnings)
    assert (tmp_path / "analysis" / "run_analysis.jsonl").exists()
