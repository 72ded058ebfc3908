"""Evolution strategies under controlled environmental variation.

The heavy lifting lives in the C++ extension ``_ievlab``; this package
re-exports it.
"""

from ._ievlab import (  # noqa: F401
    Error,
    KwResult,
    centered_ranks,
    chi2_sf,
    cmd_evolve,
    cmd_iev_report,
    cmd_plotdata,
    cmd_posteval,
    cmd_sweep,
    evolve,
    forward,
    iev,
    iev_from_double_eval,
    kruskal_wallis,
    mean_iev,
    noise_baseline,
    param_count,
    rank_fitness,
    sample_perturbations,
    sigma_act_at,
    snr,
    snr_exact,
    summarize,
)

__version__ = "0.1.0"
