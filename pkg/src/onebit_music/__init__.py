"""One-bit MUSIC: direction-of-arrival estimation from sign-quantized array snapshots."""

from .array_model import (ArrayGeometry, SnapshotKind, SnapshotMatrix, SourceScenario,
                          analytic_covariance, correlation_vs_snr, generate_snapshots,
                          steering_matrix, steering_vector, unquantized_correlation)
from .covariance import (CovarianceMatrix, CovarianceTag, approx_onebit_covariance,
                         approximation_error, arcsine_map, reconstruct_unquantized,
                         sample_covariance)
from .errors import ConfigError, DomainError, NumericError, OneBitMusicError, UsageError
from .experiments import (EstimatorVariant, ExperimentConfig, MetricRow, MetricTable,
                          approx_error_sweep, is_resolved, rmse, run_trial, sweep_separation,
                          sweep_snapshots, sweep_snr)
from .music import (EigenSystem, NoiseSubspace, SpectrumGrid, eigendecompose, estimate_doas,
                    make_grid, music_spectrum, noise_subspace, pick_peaks)
from .quantization import quantize, quantize_scalar, quantize_snapshots

__version__ = "0.1.0"
