"""Spectral toolkit for two-block spiked random matrices.

Samples spiked block models, solves the self-consistent resolvent
equations for their limiting spectral density, predicts the support edge,
outlier location and critical spike strength, and runs reproducible Monte
Carlo transition experiments.
"""

from .errors import NumericalError, QveConvergenceError, ValidationError
from .experiments import (ExperimentConfig, HistogramData, HistogramResult,
                          TransitionRow, TransitionTable, emit_report,
                          run_histogram, run_transition_sweep)
from .model import (GsbmSpec, NoiseFamily, NoiseKind, SbmParams, Shift,
                    ShiftMatrix, from_sbm, validate_sbm, validate_spec)
from .prediction import (EdgeMethod, EdgeResult, OutlierPrediction,
                         critical_lambda, find_upper_edge, hidden_lambda1,
                         hidden_threshold, predict_outlier,
                         unbalanced_lambda1, unbalanced_threshold)
from .qve import DensityCurve, QveSolution, density, solve_full, solve_reduced
from .sampler import (SampleSeed, SymMatrix, sample_gsbm, sample_noise,
                      sample_sbm_adjacency, shift_and_rescale)
from .spectra import (LocalLawReport, SpectralReport, attach_noise_spectrum,
                      check_interlacing, check_local_law, detect_communities,
                      eigen_residuals, eigen_symmetric,
                      resolvent_quadratic_form, top_eigenpairs)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
