import numpy as np
import pytest

import lmcmc


def test_version():
    assert lmcmc.__version__


@pytest.fixture(scope="module")
def banana():
    y = lmcmc.synth_banana(n=60, seed=4)
    assert y.shape == (60,)
    return lmcmc.Banana(y)


def test_model_surface(banana):
    assert banana.dim == 2
    theta = np.array([0.3, -0.4])
    assert np.isfinite(banana.log_density(theta))
    grad = banana.grad_log_density(theta)
    assert grad.shape == (2,)

    # directional finite-difference agreement
    h = 1e-6
    direction = np.array([0.7, -0.2])
    fd = (banana.log_density(theta + h * direction) - banana.log_density(theta - h * direction)) / (2 * h)
    assert fd == pytest.approx(float(grad @ direction), rel=1e-4)

    g = banana.metric(theta)
    assert g.shape == (2, 2)
    assert np.all(np.linalg.eigvalsh(g) > 0)
    dg = banana.metric_deriv(theta)
    assert len(dg) == 2 and dg[0].shape == (2, 2)


def test_run_chain_and_determinism(banana):
    kwargs = dict(method="ermlmc", iterations=400, burn_in=100, epsilon=0.1, steps=5, seed=9)
    out = lmcmc.run_chain(banana, **kwargs)
    assert out["samples"].shape == (300, 2)
    assert 0.0 < out["acceptance_rate"] <= 1.0
    assert out["ess"]["min"] >= 1.0
    assert np.array_equal(out["samples"], lmcmc.run_chain(banana, **kwargs)["samples"])

    other = lmcmc.run_chain(banana, **{**kwargs, "seed": 10})
    assert not np.array_equal(out["samples"], other["samples"])


def test_every_method_runs(banana):
    for method in ("hmc", "rmhmc", "rmlmc", "ermlmc", "rwm"):
        out = lmcmc.run_chain(banana, method=method, iterations=200, burn_in=50,
                              epsilon=0.1, steps=4, seed=3)
        assert out["samples"].shape == (150, 2)
        assert np.all(np.isfinite(out["samples"]))


def test_logistic_regression():
    x, y = lmcmc.synth_logistic(n=80, d=2, seed=5)
    assert x.shape == (80, 2) and set(np.unique(y)) <= {0.0, 1.0}
    model = lmcmc.LogisticRegression(x, y)
    assert model.dim == 3  # intercept prepended
    out = lmcmc.run_chain(model, method="rmhmc", iterations=300, burn_in=100,
                          epsilon=0.2, steps=4, seed=2)
    assert out["samples"].shape == (200, 3)
    assert out["acceptance_rate"] > 0.5


def test_gaussian_mixture():
    data = lmcmc.synth_mixture("bimodal", n=120, seed=6)
    assert lmcmc.mixture_components("bimodal") == 2
    model = lmcmc.GaussianMixture(data, components=2)
    assert model.dim == 5
    theta = model.initial_position()
    parts = model.constrain(theta)
    assert parts["pi"].sum() == pytest.approx(1.0)
    assert np.all(parts["var"] > 0)
    back = model.unconstrain(parts["pi"], parts["mu"], parts["var"])
    assert back == pytest.approx(theta, abs=1e-8)
    assert np.isfinite(model.log_likelihood(theta))


def test_diagnostics_functions():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(5000)
    est = lmcmc.ess(x)
    assert 0.8 * 5000 <= est <= 5000
    gamma = lmcmc.autocovariance(x, 3)
    assert gamma.shape == (4,)
    assert gamma[0] == pytest.approx(x.var(), rel=1e-10)

    report = lmcmc.ess_report(rng.standard_normal((1000, 3)), total_seconds=2.0)
    assert report["per_dimension"].shape == (3,)
    assert report["min"] <= report["median"] <= report["max"]
    assert report["min_per_second"] == pytest.approx(report["min"] / 2.0)


def test_volume_correction_switch():
    y = lmcmc.synth_banana(n=40, seed=8)
    model = lmcmc.Banana(y)
    on = lmcmc.run_chain(model, method="rmlmc", iterations=400, burn_in=100,
                         epsilon=0.25, steps=5, seed=12)
    off = lmcmc.run_chain(model, method="rmlmc", iterations=400, burn_in=100,
                          epsilon=0.25, steps=5, seed=12, volume_correction=False)
    assert not np.array_equal(on["samples"], off["samples"])


def test_tune_step_size(banana):
    eps = lmcmc.tune_step_size(banana, "ermlmc", eps_lo=1e-3, eps_hi=1.0,
                               pilot_iters=300, steps=5, seed=7)
    assert 1e-3 < eps < 1.0


def test_errors_surface_as_exceptions(banana):
    with pytest.raises(Exception):
        lmcmc.run_chain(banana, method="nuts", iterations=10, burn_in=1)
    with pytest.raises(Exception):
        lmcmc.run_chain(banana, method="hmc", iterations=10, burn_in=10)
