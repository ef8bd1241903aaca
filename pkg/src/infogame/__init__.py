"""Information accounting for learning on finite hypothesis classes.

The package measures exactly how many bits a learning algorithm reveals
about its input sample, builds the cover-cascade learner that provably
reveals few bits on average, and solves the learner-versus-nature
average-information game over symmetric input laws.
"""

from .analysis import (
    GeneralizationReport,
    ShiftReport,
    StabilityReport,
    average_information_complexity,
    generalization_experiment,
    sample_complexity_shift,
    stability_check,
)
from .info import (
    LearnerChannel,
    average_information,
    deterministic_channel,
    entropy,
    learner_information,
    load_channel,
    mutual_information,
    save_channel,
)
from .minimax import (
    ConvergenceError,
    NatureStrategySet,
    SaddleResult,
    allowed_outputs,
    best_response_learner,
    best_response_nature,
    duality_gap,
    solve_saddle,
    worst_case_value,
)
from .model import (
    Domain,
    Hypothesis,
    HypothesisClass,
    LabeledSample,
    disagreement,
    empirical_error,
    load_class,
    make_full_cube,
    make_random_class,
    make_thresholds,
    realizing_hypotheses,
    save_class,
    shatters,
    true_error,
    vc_dimension,
)
from .nets import (
    EpsilonNet,
    NetSequence,
    NetsLearner,
    StoppingReport,
    build_net_sequence,
    exact_minimal_cover,
    greedy_cover,
    haussler_bound,
    nets_learn,
    stopping_report,
)
from .prob import (
    DistributionOverX,
    Prior,
    SampleLaw,
    SymmetricSampleDistribution,
    draw_sample,
    iid_to_symmetric,
    l1_distance,
    load_distribution,
    load_symmetric,
    marginal,
    mix,
    sample_law,
    save_distribution,
    save_symmetric,
)

__version__ = "0.1.0"
