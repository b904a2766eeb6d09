"""Diffusion-based decentralised non-parametric learning with error bounds."""

from .agent import Agent, ExploitResult, RequestStrategy
from .config import ScenarioConfig, default_config, load_config, parse_config
from .errors import (ConfigInvalid, DomainViolation, InvalidRange, IOFailure, NPDiffusionError,
                     TopologyUnconnectable, TruncationExhausted, ZeroMass)
from .estimator import (BoundParams, KernelConfig, LocalEvaluation, Sample, alpha, beta_bound,
                        evaluate, kappa, kernel_eval, nw_estimate, optimize_bandwidth)
from .network import Graph, Message, Phenomenon, TopologySpec, generate_topology
from .simulation import SimResult, run, run_scenario
from .tuples import AppendOutcome, AppendStatus, EstimateTuple, TupleStore

__version__ = "0.1.0"

__all__ = [
    "Agent", "AppendOutcome", "AppendStatus", "BoundParams", "ConfigInvalid", "DomainViolation",
    "EstimateTuple", "ExploitResult", "Graph", "IOFailure", "InvalidRange", "KernelConfig",
    "LocalEvaluation", "Message", "NPDiffusionError", "Phenomenon", "RequestStrategy", "Sample",
    "ScenarioConfig", "SimResult", "TopologySpec", "TopologyUnconnectable", "TruncationExhausted",
    "TupleStore", "ZeroMass", "alpha", "beta_bound", "default_config", "evaluate",
    "generate_topology", "kappa", "kernel_eval", "load_config", "nw_estimate",
    "optimize_bandwidth", "parse_config", "run", "run_scenario",
]
