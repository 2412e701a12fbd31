"""Capacity of massive MIMO channels with partially visible scattering clusters."""

from ._backend import BACKEND
from .capacity_closed import (all_pv_highsnr, asymptotic_rate, c_max, closed_form_bound,
                              closed_form_bound_all_pv, high_snr_bound, n_count, n_count_oracle)
from .capacity_mc import CapacityResult, mc_capacity, mc_jensen, mmse_sum_rate
from .channel import (ScenarioConfig, build_bundle, draw_channel, eigen_spread,
                      receiver_correlation, symmetric_config)
from .correlation import CorrelationMatrix, GeometricSpec, geometric_corr, toeplitz_corr, toeplitz_det
from .errors import BudgetExceededError, ConfigError
from .experiments import SweepSpec, emit_eigen, run_sweep
from .verify import run_verify

__version__ = "0.1.0"
