"""Fairness-constrained classification from pairwise same-treatment judgments.

The library trains randomized classifiers that minimize training error
subject to elicited pairwise constraints: for every pair judged "treat the
same", the two positive-classification probabilities may differ by at most
gamma plus a slack, and the judgment-weighted average slack is budgeted by
eta. Training runs a two-player no-regret game whose only learning
primitive is a cost-sensitive classification oracle.
"""

__version__ = "0.1.0"

from .classifiers import (LinearThreshold, RandomizedClassifier, SparsifyResult,
                          TabularHypothesis, compact, pair_disparity,
                          positive_rate, positive_rates, sparsify)
from .csc import (CscInstance, ExhaustiveTabularOracle, HypothesisPool,
                  LeastSquaresOracle, PoolOracle, csc_objective,
                  full_tabular_pool, solve_exact, solve_heuristic)
from .data import (ConstraintSet, Dataset, JudgeResponse, PairSet,
                   SyntheticJudgeSpec, build_constraints, load_dataset,
                   read_judgments, sample_pairs, simulate_judge,
                   write_judgments)
from .lagrangian import (DualVars, FairnessParams, GuaranteeBudgets,
                         PrimalVars, best_response_dual, best_response_primal,
                         build_costs, lagrangian_value, penalty)
from .metrics import (BoundInputs, BoundResult, FairnessLossReport,
                      empirical_error, error_bound, fairness_loss_pair,
                      fairness_loss_set, fairness_generalization_bound)
from .solver import (SolveReport, SolverConfig, SweepPoint, certify,
                     compute_iterations, eg_update, ogd_update, pareto_sweep,
                     solve)

__all__ = [name for name in dir() if not name.startswith("_")]
