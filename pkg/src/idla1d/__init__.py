"""1-D internal DLA with long-range random walks.

Modules
-------
increments
    Increment laws, exact sampling and exact laws of partial sums.
walker
    Single walks under exit, hit-or-exit and first-passage rules.
cluster
    The IDLA aggregate, inner radius and coverage times.
ladder
    Ladder heights, residual-lifetime chains, the Wiener-Hopf ladder law and
    the mean ladder height series.
theory
    Limit functions and growth constants by quadrature.
harness
    Experiments, estimators, verdicts and result documents.
"""

from ._backend import NAME as BACKEND
from .cluster import (BudgetExceeded, Cluster, check_inversion, lost_particles, new_cluster,
                      run, run_until_covered)
from .harness import (EstimateWithError, ExperimentConfig, compare, idla_diagnostics,
                      run_experiment)
from .increments import (IncrementLaw, InadmissibleLaw, check_admissible, exact_pmf, load_law,
                         preset, sample)
from .ladder import (ladder_height_law, residual_chain, sample_ladder_heights,
                     spitzer_mu, stationary_distributions)
from .walker import (CapExceeded, Verdict, WalkOutcome, first_passage, first_passage_over,
                     run_hit_or_exit, run_until_exit)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BudgetExceeded", "CapExceeded", "Cluster", "EstimateWithError",
    "ExperimentConfig", "IncrementLaw", "InadmissibleLaw", "Verdict", "WalkOutcome",
    "check_admissible", "check_inversion", "compare", "exact_pmf", "first_passage",
    "first_passage_over", "idla_diagnostics", "ladder_height_law", "load_law",
    "lost_particles", "new_cluster", "preset", "residual_chain", "run", "run_experiment",
    "run_hit_or_exit", "run_until_covered", "run_until_exit", "sample",
    "sample_ladder_heights", "spitzer_mu", "stationary_distributions",
]
