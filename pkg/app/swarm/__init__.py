# Swarm module
from .pso import SearchSpace, SwarmConfig, SwarmResult, pso_minimize

__all__ = ["SearchSpace", "SwarmConfig", "SwarmResult", "pso_minimize"]
