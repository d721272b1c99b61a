"""Active preference learning over trajectories with max-regret queries."""

from .core import (
    ContractError,
    DegenerateObjectiveError,
    Environment,
    ObjectiveMode,
    Path,
    PlannerError,
    WeightBounds,
    cost,
    err_path,
    err_weight,
    optimal_cost,
    regret,
    symmetric_regret,
)
from .belief import (
    BeliefState,
    FeedbackRecord,
    FeedbackSequence,
    Hypothesis,
    RenormalizationError,
    estimate_weight,
    expected_weight,
    feasible,
    likelihood,
    sample_omega,
    update,
)
from .selectors import (
    Converged,
    QueryPair,
    max_regret_feasible,
    prob_symmetric_regret,
    select_entropy,
    select_max_regret,
    select_random,
)
from .gridworld import GridEnvironment, GridMap, LatticePath, Region
from .driver import DriverEnvironment, DriverScene, Trajectory
from .users import SimulatedUser, answer, correct_prob, sample_user_weight
from .experiments import (
    ExperimentConfig,
    GeneralizationReport,
    StudyResult,
    TrialResult,
    generalization_study,
    pearson,
    run_learning,
    run_study,
)

__version__ = "0.1.0"
