"""
Gossip Exchange Simulator - seedable GOSSIP/LOCAL simulation with protocol,
decomposition, spanner and simulator verification
"""

from .config import SimulatorConfig
from .engine import KnowledgeState, ProcessTrace, RandomSource, run_process
from .experiment_config import ExperimentConfig
from .graph import DirectedEdgeSet, Graph, generate
from .protocols import default_tau, direct_exchange, greedy_unheard_baseline, rumor_by_superstep, superstep
from .simulate import SimulationOutcome, run_local

__all__ = [
    "SimulatorConfig",
    "ExperimentConfig",
    "Graph",
    "DirectedEdgeSet",
    "generate",
    "KnowledgeState",
    "ProcessTrace",
    "RandomSource",
    "run_process",
    "superstep",
    "default_tau",
    "rumor_by_superstep",
    "direct_exchange",
    "greedy_unheard_baseline",
    "SimulationOutcome",
    "run_local",
]
