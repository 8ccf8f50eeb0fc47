"""Fairness-aware audits of neural-network pruning.

Train small image classifiers, prune them iteratively under several
magnitude and random techniques with weight rewinding or finetuning,
measure how accuracy degrades per class and per writer cohort, fit a
linear model relating that degradation to class statistics, and select
operating points from the accuracy-constrained Pareto frontier.
"""

from .data import (CohortGroupSpec, CohortSpec, LabeledDataset, SplitSpec,
                   SynthClassSpec, SynthSpec, class_entropy, class_imbalance,
                   load_idx, save_idx, split, synthesize, synthesize_cohort)
from .metrics import (FairnessMetric, OperatingPoint, accuracy_quartile,
                      per_class_accuracy, total_accuracy, unfairness)
from .net import (AugmentConfig, Network, TrainConfig, build_network, evaluate,
                  lenet, mlp, train)
from .pareto import (EmptyFeasibleSetError, Objective, SelectionProblem,
                     ValueFunction, filter_constraint, pareto_frontier,
                     scalarize_select)
from .pruning import (PruneSchedule, PruneTechnique, WeightTreatment, iterate,
                      prune_step, sparsity_of)
from .regression import (ExperimentRecord, build_design_matrix, fit_ols,
                         one_tailed_test)
from .rng import RngState

__version__ = "0.1.0"

__all__ = [
    "AugmentConfig", "CohortGroupSpec", "CohortSpec", "EmptyFeasibleSetError",
    "ExperimentRecord", "FairnessMetric", "LabeledDataset", "Network",
    "Objective", "OperatingPoint", "PruneSchedule", "PruneTechnique",
    "RngState", "SelectionProblem", "SplitSpec", "SynthClassSpec", "SynthSpec",
    "TrainConfig", "ValueFunction", "WeightTreatment", "accuracy_quartile",
    "build_design_matrix", "build_network", "class_entropy", "class_imbalance",
    "evaluate", "filter_constraint", "fit_ols", "iterate", "lenet", "load_idx",
    "mlp", "one_tailed_test", "pareto_frontier", "per_class_accuracy",
    "prune_step", "save_idx", "scalarize_select", "sparsity_of", "split",
    "synthesize", "synthesize_cohort", "total_accuracy", "train", "unfairness",
]
