"""Minimum-energy routing for wireless networks under jamming."""

from .channel import (
    ChannelParams,
    Jammer,
    LinkGeometry,
    NetworkInstance,
    Node,
    aggregate_jamming,
    link_outage_approx,
    link_outage_exact,
    required_power_approx,
    required_power_exact,
    sir_threshold,
)
from .errors import (
    ConvergenceError,
    DomainError,
    InstanceFormatError,
    LPError,
    PathOverflowError,
    SingularityError,
)
from .experiments import ExperimentConfig, ResultTable, preset, run_histograms, run_sweep, run_throughput_study
from .netgen import GenSpec, generate_instance, load_instance, save_instance
from .optimal import PathEnumConfig, brute_force_route, enumerate_paths, optimal_power_for_path
from .routing import (
    RoutePlan,
    allocate_powers_approx,
    epsilon_budget,
    expand_network,
    heuristic_tighten,
    mer_route,
    merap_route,
    mereq_route,
    route,
)
from .scheduling import FlowSet, TransmissionSet, max_throughput, maximal_transmission_sets

__version__ = "0.1.0"
