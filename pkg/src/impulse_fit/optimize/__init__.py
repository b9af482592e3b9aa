from .de import DeConfig, Population, de_generation_step, de_minimize
from .lbfgs import LbfgsConfig, lbfgs_minimize, two_loop_direction
from .result import OptimResult

__all__ = [
    "DeConfig",
    "LbfgsConfig",
    "OptimResult",
    "Population",
    "de_generation_step",
    "de_minimize",
    "lbfgs_minimize",
    "two_loop_direction",
]
