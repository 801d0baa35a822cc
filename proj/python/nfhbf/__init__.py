# SPDX-License-Identifier: Apache-2.0
"""Near-field dynamic hybrid beamforming."""

from ._core import (
    Config,
    ConfigError,
    IoError,
    achievable_rate,
    edof,
    edof_profile,
    hybrid_factorize,
    run_sweep,
    run_trial,
    sample_channels,
    solve_pli,
    solve_wmmse_ts,
    water_filling,
)

__all__ = [
    "Config",
    "ConfigError",
    "IoError",
    "achievable_rate",
    "edof",
    "edof_profile",
    "hybrid_factorize",
    "run_sweep",
    "run_trial",
    "sample_channels",
    "solve_pli",
    "solve_wmmse_ts",
    "water_filling",
]
