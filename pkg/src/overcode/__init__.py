"""Partly overloaded spreading sequences and a Monte Carlo CDMA link simulator."""

__version__ = "0.1.0"

from ._accel import backend_name
from .codes import (
    OverloadedCodeSet,
    apply_pair_swaps,
    cross_correlation,
    generate_overloaded_set,
    is_hadamard,
    max_cross_correlation,
    min_correlation_bound,
    ovsf_matrix,
)
from .engine import (
    BerReport,
    ScenarioConfig,
    UserSpec,
    adjusted_sending_probability,
    analytic_single_user_ber,
    hadamard_baseline_scenario,
    run_iteration,
    run_preset,
    run_scenario,
    run_sweep,
    table_setup,
)
from .phy import ChannelConfig, Fec, Modulation, SnrReference
from .tree import CodeTree, NodeAddress, TrafficClass
