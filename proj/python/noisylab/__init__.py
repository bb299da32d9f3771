"""Noisy-label memorization lab."""

from ._noisylab import (
    __version__,
    bernoulli_kl,
    binom_tail,
    bound_report_csv,
    corrected_label,
    exact_outcome,
    lc_failure_lower,
    lc_success_lower,
    max_l_for_failure,
    min_l_for_delta,
    peer_failure_lower,
    run_config,
    run_trials,
    tau_exact,
    validate_config,
)

__all__ = [
    "__version__",
    "bernoulli_kl",
    "binom_tail",
    "bound_report_csv",
    "corrected_label",
    "exact_outcome",
    "lc_failure_lower",
    "lc_success_lower",
    "max_l_for_failure",
    "min_l_for_delta",
    "peer_failure_lower",
    "run_config",
    "run_trials",
    "tau_exact",
    "validate_config",
]
