"""Change-point tests for the mean function of a sequence of curves."""

from ._core import (
    CriticalValueTable,
    Engine,
    FdcpError,
    Mode,
    binary_segmentation,
    eigen,
    limit_quantiles,
    p_value,
    pooled_kernel,
    power_study,
    r_process,
    run_test,
    select_d,
    simulate_limit_draws,
    simulate_sample,
    split_kernel,
)

__all__ = [
    "CriticalValueTable",
    "Engine",
    "FdcpError",
    "Mode",
    "binary_segmentation",
    "eigen",
    "limit_quantiles",
    "p_value",
    "pooled_kernel",
    "power_study",
    "r_process",
    "run_test",
    "select_d",
    "simulate_limit_draws",
    "simulate_sample",
    "split_kernel",
]
