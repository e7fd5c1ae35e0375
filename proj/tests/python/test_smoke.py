import math

import pytest

import dynetrack as dt


def test_closed_forms():
    assert dt.mse_adaptive_coherent(100) == pytest.approx(0.05)
    assert dt.mse_heterodyne(200) == pytest.approx(0.05)
    assert dt.mse_vs_gain(2.0, 1.0, 1.0) == pytest.approx(0.5)
    assert dt.gain_mismatch_threshold() == pytest.approx(1 + math.sqrt(2))
    mse, moderate = dt.mse_adaptive_squeezed(0.5, 1000)
    assert mse == pytest.approx(0.01118, abs=1e-5)
    assert moderate
    assert dt.optimal_gain(1.0, 20.0) == 40.0


def test_noise_power_and_filter():
    assert dt.noise_power(math.pi / 2, S=0.25, S_a=4.0) == pytest.approx(0.25)
    assert dt.noise_power(0.3) == 1.0
    with pytest.raises(ValueError):
        dt.noise_power(0.0, S=2.0)
    assert dt.riccati_step(0.05, 1.0, 10.0, 1e-3) == pytest.approx(0.05)
    phi_hat, sigma2 = dt.filter_update(0.0, 0.06, 0.0, 1.0 / 0.12, 0.0, 1.0)
    assert phi_hat == 0.0
    assert sigma2 == pytest.approx(0.02)


def test_fit_power_law():
    pts = [(n, 0.5 * n ** -0.5) for n in (10.0, 100.0, 1e3)]
    fit = dt.fit_power_law(pts)
    assert fit["exponent"] == pytest.approx(-0.5)
    assert fit["constant"] == pytest.approx(0.5)
    with pytest.raises(ValueError):
        dt.fit_power_law(pts[:2])


def test_simulations_are_reproducible():
    a = dt.simulate_adaptive(100, n_traj=8, seed=3)
    b = dt.simulate_adaptive(100, n_traj=8, seed=3)
    assert a == b
    assert a["mse"] == pytest.approx(a["analytic"], rel=0.2)
    h = dt.simulate_heterodyne(100, n_traj=4, seed=3)
    assert h["mse"] == pytest.approx(dt.mse_heterodyne(100), rel=0.25)


def test_table():
    csv = dt.sql_table_csv()
    assert "CW,adaptive,0.5/N^0.5," in csv
