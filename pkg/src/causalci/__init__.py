"""Bayesian-augmented independence tests and constraint-based causal
discovery for small discrete datasets."""

from .bnmodel import (
    BifParseError,
    Dataset,
    DiscreteBayesNet,
    NetworkValidationError,
    forward_sample,
    load_bif,
    parse_bif,
    save_bif,
    serialize_bif,
)
from .citest import (
    CiDecision,
    ContingencyTable,
    TestConfig,
    ThetaTilde,
    bayes_factor,
    bf_chi2_test,
    bf_threshold_test,
    calibrate_mi_threshold,
    conditional_test,
    g_test,
    log_bayes_factor,
    mi_eb,
    mi_mle,
    solve_theta_tilde,
)
from .discovery import (
    DiscoveryStats,
    apply_meek_rules,
    learn_cpdag,
    learn_skeleton,
    make_data_tester,
    make_oracle_tester,
    orient_v_structures,
)
from .evalbench import (
    BenchmarkReport,
    SyntheticPairSpec,
    gen_synthetic_pair,
    mc_mi_posterior_oracle,
    run_discovery_bench,
    run_mi_error_bench,
    run_polya_approx_bench,
    run_statistic_distribution_bench,
    run_type1_power_bench,
    run_variance_bench,
    shd,
)
from .graphs import Cpdag, Dag, d_separated, dag_to_cpdag
from .numstat import (
    AlphaEstimate,
    DegenerateCountsError,
    chi2_sf,
    digamma,
    dirichlet_sample,
    estimate_alpha_map,
    ln_gamma,
    log_polya,
)

__version__ = "0.1.0"
