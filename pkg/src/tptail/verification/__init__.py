"""Monte Carlo domination experiments and deterministic lemma checks."""
from .enumeration import ExactComparison, exact_domination, rademacher_lambda_max, sign_patterns
from .experiments import (
    ADAPTERS,
    Experiment,
    adapter_for,
    bound_for,
    run_domination,
    shipped_ensembles,
    shipped_experiments,
    threshold_grid,
)
from .lemmas import (
    LEMMA_SUITE,
    EnumeratedSum,
    LemmaCheckResult,
    check_averaged_mgf_tail,
    check_bounded_bernstein_mgf,
    check_cgf_symmetrized,
    check_chernoff_mgf,
    check_golden_thompson,
    check_laplace_method,
    check_lieb_trace,
    check_master_tail,
    check_mgf_gaussian,
    check_mgf_rademacher,
    check_subexp_bernstein_mgf,
    check_symmetrization,
    run_lemma_suite,
)
from .stats import (
    CSV_HEADER,
    DominationReport,
    DominationRow,
    TailEstimate,
    clopper_pearson_upper,
    estimate_tail,
    estimate_tails,
)
