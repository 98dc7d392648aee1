"""chainbound: chaining nets, generalized Holder seminorms, and Monte Carlo
verification of sharp supremum bounds for stochastic integrals."""

__version__ = "0.1.0"

from . import chaining, fixtures, holder, metric, modulus, pam, stochastic
from .chaining import ChainingNet, build_net, chain_decompose, pair_sequence, verify_net
from .holder import (
    SampledField,
    SeminormResult,
    embedding_constants,
    holder_seminorm_alpha,
    log_blowup_equivalence,
    seminorm_embedded,
    seminorm_exact,
)
from .metric import (
    DimensionInfo,
    MetricSpace,
    covering_number,
    euclidean_dims,
    fit_dimension,
    from_distance_matrix,
    from_points,
    load_point_cloud,
    rescale,
    restrict,
)
from .modulus import (
    Modulus,
    check_admissible,
    custom,
    dyadic_tail_bound,
    eval_modulus,
    growth_constants,
    certified_constants,
    log_boosted,
    log_damped,
    log_pd,
    parse_modulus,
    power,
    scaled,
)
from .pam import (
    PAMEnsemble,
    PAMParams,
    green_eval,
    green_l2_difference,
    green_regularity_constant,
    pam_modulus_statistic,
    pam_solve,
    parabolic_metric,
)
from .stochastic import (
    McEstimate,
    OUParams,
    WienerEnsemble,
    experiment_good_lambda,
    experiment_kc_bound,
    experiment_levy_modulus,
    experiment_martingale_sup,
    experiment_ou_longterm,
    experiment_sup_integrals,
    gaussian_moment,
    ito_integral,
    ou_exact_path,
    simulate_brownian,
    substream,
    weighted_sup_lemma_bound,
)
