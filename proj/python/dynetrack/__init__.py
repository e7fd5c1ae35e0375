"""Adaptive phase tracking: closed-form error laws and Monte Carlo ensembles."""

from ._dynetrack import (
    filter_update,
    fit_power_law,
    gain_mismatch_threshold,
    mse_adaptive_coherent,
    mse_adaptive_squeezed,
    mse_heterodyne,
    mse_vs_gain,
    noise_power,
    optimal_gain,
    photons_per_coherence_time,
    riccati_step,
    simulate_adaptive,
    simulate_heterodyne,
    sql_table_csv,
)

__all__ = [
    "filter_update",
    "fit_power_law",
    "gain_mismatch_threshold",
    "mse_adaptive_coherent",
    "mse_adaptive_squeezed",
    "mse_heterodyne",
    "mse_vs_gain",
    "noise_power",
    "optimal_gain",
    "photons_per_coherence_time",
    "riccati_step",
    "simulate_adaptive",
    "simulate_heterodyne",
    "sql_table_csv",
]
