"""Discrete-event simulator for depth-based routing in underwater acoustic
sensor networks: AMCTD with courier nodes, plus DBR and EEDBR baselines."""

from .engine import PROTOCOLS, RoundRecord, Simulation, run_simulation
from .model import NetworkConfig, generate_topology, load_config

__all__ = ["PROTOCOLS", "NetworkConfig", "RoundRecord", "Simulation", "generate_topology",
           "load_config", "run_simulation"]
__version__ = "0.1.0"
