"""Pool-based distributed evolutionary computation toolkit.

Islands run a canonical generational GA on concatenated deceptive trap
functions and exchange individuals through a stateless chromosome pool
server; a deterministic churn simulator and a log analyzer model and
recompute volunteer-behavior statistics from experiment logs.
"""

from .engine import (
    EAParams,
    Individual,
    Population,
    crossover,
    mutate,
    new_random_population,
    run_span,
    step_generation,
    tournament_select,
)
from .rng import Rng
from .trap import TrapSpec, evaluate, is_solution, trap_fitness

__version__ = "0.1.0"

__all__ = [
    "EAParams",
    "Individual",
    "Population",
    "Rng",
    "TrapSpec",
    "crossover",
    "evaluate",
    "is_solution",
    "mutate",
    "new_random_population",
    "run_span",
    "step_generation",
    "tournament_select",
    "trap_fitness",
    "__version__",
]
