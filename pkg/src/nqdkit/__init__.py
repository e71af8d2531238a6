"""Numerical toolkit for nonclassicality of quantum-optical processes.

Filtered quasiprobability distributions certify nonclassicality through
negativity: an admissible filter regularizes the P function into a smooth
distribution whose negative values survive as a faithful witness.  The
package computes these distributions directly from state models, estimates
them from homodyne samples via pattern functions, and predicts process
outputs for classical probe mixtures.
"""

from .errors import (
    CapabilityError, CoverageError, FormatError, NqdkitError,
    NumericalContractError, ParameterError, ParseError, RangeError,
    ResolutionError, TruncationError, ZeroWeightError,
)
from .filters import FilterSpec, build_filter, filter_fourier, filter_value
from .states import (
    Cat, Coherent, DisplacedThermal, Fock, PhotonAdded, PhotonSubtracted,
    SqueezedVacuum, StateModel, Thermal, char_fn_normal, fock_density,
    format_state, mean_photon, parse_state, quadrature_moments,
    quadrature_pdf,
)
from .processes import (
    KerrCat, PhotonAddition, PhotonSubtraction, ProcessModel,
    ThermalDecoherence, apply_to_coherent, decohere_char_fn, fixed_point_check,
    format_process, is_past_classicality_threshold, noise_gaussian_coefficient,
    parse_process, p_gaussian_covariance_eigenvalues,
)
from .quasiprob import (
    GridSpec, NegativityScan, QuasiprobGrid, RadialGridSpec, negativity_scan,
    nqd_direct, nqd_direct_point, pnqd_direct, read_grid, write_grid,
)
from .homodyne import (
    QuadratureDataset, read_dataset, simulate_dataset, write_dataset,
)
from .estimator import (
    PnqdTable, pattern_fn, phase_randomized_pattern, read_pnqd, sample_nqd,
    sample_nqd_eta_removed, sample_nqd_point, sample_pnqd, write_pnqd,
)
from .predictor import (
    CoherentDelta, DiscreteMixture, InputPSpec, ThermalRadial,
    direct_radial_pnqd_table, parse_input_pspec, parseval_output_nqd,
    predict_output_nqd,
)

__version__ = "0.1.0"

__all__ = [
    "NqdkitError", "ParameterError", "ParseError", "FormatError",
    "ZeroWeightError", "CapabilityError", "NumericalContractError",
    "TruncationError", "ResolutionError", "RangeError", "CoverageError",
    "FilterSpec", "build_filter", "filter_value", "filter_fourier",
    "StateModel", "Coherent", "Thermal", "Fock", "SqueezedVacuum", "Cat",
    "DisplacedThermal", "PhotonAdded", "PhotonSubtracted", "char_fn_normal",
    "fock_density", "mean_photon", "quadrature_pdf", "quadrature_moments",
    "format_state", "parse_state",
    "ProcessModel", "PhotonAddition", "PhotonSubtraction", "KerrCat",
    "ThermalDecoherence", "apply_to_coherent", "decohere_char_fn",
    "is_past_classicality_threshold", "noise_gaussian_coefficient",
    "p_gaussian_covariance_eigenvalues", "fixed_point_check",
    "format_process", "parse_process",
    "GridSpec", "RadialGridSpec", "QuasiprobGrid", "NegativityScan",
    "nqd_direct", "nqd_direct_point", "pnqd_direct", "negativity_scan",
    "write_grid", "read_grid",
    "QuadratureDataset", "simulate_dataset", "write_dataset", "read_dataset",
    "PnqdTable", "pattern_fn", "phase_randomized_pattern", "sample_nqd",
    "sample_nqd_point", "sample_nqd_eta_removed", "sample_pnqd",
    "write_pnqd", "read_pnqd",
    "InputPSpec", "ThermalRadial", "CoherentDelta", "DiscreteMixture",
    "parse_input_pspec", "predict_output_nqd", "parseval_output_nqd",
    "direct_radial_pnqd_table",
]
