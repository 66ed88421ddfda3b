import math
import os
import subprocess

import numpy as np
import pytest

import _lrcp as lrcp


def test_logpdf_matches_dense_oracle():
    rng = np.random.default_rng(0)
    n, r = 12, 3
    mu = rng.normal(size=n)
    d = rng.uniform(0.5, 2.0, size=n)
    v = rng.normal(scale=0.3, size=(n, r))
    x = rng.normal(size=n)
    fast = lrcp.logpdf_lowrank(mu, d, v, x)
    slow = lrcp.dense_logpdf(mu, d, v, x)
    assert fast == pytest.approx(slow, rel=1e-10)


def test_logpdf_standard_normal():
    one = np.ones(1)
    assert lrcp.logpdf_lowrank(np.zeros(1), one, np.zeros((1, 1)),
                               np.zeros(1)) == pytest.approx(
                                   -0.5 * math.log(2 * math.pi))


def test_crps_point_mass():
    assert lrcp.crps_from_samples([2.0] * 50, 5.0) == pytest.approx(3.0)


def test_train_forecast_evaluate_roundtrip(tmp_path):
    values = lrcp.synthetic_panel(num_series=3, num_steps=300, seed=7)
    assert values.shape == (3, 300)

    model = lrcp.train(values[:, :280], total_updates=20, horizon=6,
                       rank=2, hidden=6, ecdf_window=120, seed=1)
    assert model.num_series == 3
    assert model.rank == 2

    samples = lrcp.forecast(model, values[:, :280], horizon=6,
                            num_samples=50, seed=3)
    assert samples.shape == (6, 50, 3)
    assert np.isfinite(samples).all()

    again = lrcp.forecast(model, values[:, :280], horizon=6,
                          num_samples=50, seed=3)
    assert np.array_equal(samples, again)

    metrics = lrcp.evaluate(samples, values[:, 280:286])
    for key in ("crps", "crps_sum", "mse", "mse_sum"):
        assert metrics[key] >= 0.0
        assert math.isfinite(metrics[key])

    path = str(tmp_path / "model.json")
    lrcp.save_model(model, path)
    restored = lrcp.load_model(path)
    resampled = lrcp.forecast(restored, values[:, :280], horizon=6,
                              num_samples=50, seed=3)
    assert np.array_equal(samples, resampled)


def test_errors_map_to_python():
    with pytest.raises(ValueError):
        lrcp.load_model("/nonexistent/model.json")


@pytest.mark.skipif("LRCP_CLI" not in os.environ, reason="CLI path not set")
def test_cli_pipeline(tmp_path):
    cli = os.environ["LRCP_CLI"]
    env = dict(os.environ)
    run = lambda *args: subprocess.run(
        [cli, *args], cwd=tmp_path, env=env, capture_output=True, text=True)

    r = run("synth", "--data", "panel.csv", "--seed", "5")
    assert r.returncode == 0, r.stderr
    r = run("train", "--data", "panel.csv", "--seed", "5", "--horizon", "6",
            "--total-updates", "5", "--rank", "2")
    assert r.returncode == 0, r.stderr
    r = run("forecast", "--data", "panel.csv", "--horizon", "6",
            "--num-eval-samples", "20", "--origin", "23990")
    assert r.returncode == 0, r.stderr
    r = run("evaluate", "--data", "panel.csv", "--horizon", "6",
            "--samples", "samples.csv", "--origins", "23990")
    assert r.returncode == 0, r.stderr
    assert (tmp_path / "metrics.json").exists()

    bad = run("train", "--data", "missing.csv")
    assert bad.returncode == 3
