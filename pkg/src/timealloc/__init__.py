"""Online allocation of idle time to tasks of random duration and reward."""

from .env import (ConfigurationError, DomainError, EnvironmentSpec, affine_env, concave_env,
                  discrete_env, two_point_env)
from .harness import RegretRecord, Trajectory, regret, simulate, sweep
from .oracle import solve_c_star, solve_value_function
from .policies import make_policy

__all__ = [
    "ConfigurationError", "DomainError", "EnvironmentSpec", "affine_env", "concave_env",
    "discrete_env", "two_point_env", "RegretRecord", "Trajectory", "regret", "simulate", "sweep",
    "solve_c_star", "solve_value_function", "make_policy",
]
__version__ = "0.1.0"
