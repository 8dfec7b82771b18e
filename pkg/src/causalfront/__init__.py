"""Evolutionary search for causal models that trade fit against causal influence."""

__version__ = "0.1.0"

from .bell import chsh, generate_frequencies
from .estimator import IslandSearch, ParetoSearch, check_frequency_table
from .evolution import EvolutionConfig, EvolutionResult, Evaluator, run_evolution
from .graph import CausalGraph, GraphError, NodeSpec, bell_graph
from .island import Island, IslandPlan, default_plan, run_island_plan, transplant
from .metrics import FrequencyTable, causal_influence_empirical, causal_influence_model, tvd
from .model import Individual, joint_distribution, observable_joint
from .pareto import EpsilonArchive, ParetoFront, hypervolume

__all__ = [
    "CausalGraph", "EpsilonArchive", "Evaluator", "EvolutionConfig", "EvolutionResult",
    "FrequencyTable", "GraphError", "Individual", "Island", "IslandPlan", "IslandSearch",
    "NodeSpec", "ParetoFront", "ParetoSearch", "bell_graph", "causal_influence_empirical",
    "causal_influence_model", "check_frequency_table", "chsh", "default_plan",
    "generate_frequencies", "hypervolume", "joint_distribution", "observable_joint",
    "run_evolution", "run_island_plan", "transplant", "tvd",
]
