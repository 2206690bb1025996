"""Spin chain design: spectra, couplings, transfer dynamics and disorder."""

from ._core import (
    ChainCouplings,
    ChainforgeError,
    EigenSystem,
    Spectrum,
    __version__,
    average_fidelity,
    boundary_metric,
    central_splitting,
    compute_weights,
    default_transfer_time,
    effective_model,
    eigendecompose,
    fit_beta,
    forward_eigenvalues,
    generate_cosine,
    generate_inverted_quadratic,
    generate_linear,
    overlap_trace,
    presets,
    run_experiment,
    shift_spectrum,
    solve,
    transfer_overlap,
    verify_pst,
    weighted_variance,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
