"""Bayesian active learning of causal probability trees."""

from .gain import (
    CapacityError,
    GainScore,
    actual_gain,
    candidate_interventions,
    evidence_in_favor,
    expected_gain,
    information_gain,
    jeffrey_divergence,
    two_var_actual_gain_closed_form,
)
from .hypotheses import (
    CausalOrder,
    ContextSwapSpec,
    HypothesisSet,
    PriorTable,
    all_orders,
    assign_priors,
    build_hypothesis_set,
    chain_tree,
    context_swap_tree,
    from_specs,
)
from .inference import (
    BeliefState,
    CountTable,
    Dataset,
    Posterior,
    log_marginal_likelihood,
    posterior,
    predictive,
    update_counts,
)
from .ptree import (
    OBSERVE,
    Intervention,
    PNode,
    PTree,
    Statement,
    TreeStructureError,
    VariableSpace,
    build_tree,
    do,
    event_probability,
    intervene,
    leaf_count,
    realization_path,
    realization_probability,
    sample,
)
from .simharness import (
    EpisodeConfig,
    EpisodeResult,
    GroundTruth,
    Setup,
    parameterize_truth,
    run_episode,
    run_experiment,
    steps_to_certainty,
)
from .strategies import StrategyKind, UnsupportedStrategyError, edge_beliefs, entropy_cost, select

__version__ = "0.1.0"
