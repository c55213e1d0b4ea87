"""Spectral toolkit for thermal quasi-geostrophic flow in complex time.

Subpackages:

- ``tqg.spectral``   Fourier fields on the 2-torus (mean-free, band-limited).
- ``tqg.norms``      Sobolev/Gevrey norms and analyticity-radius fitting.
- ``tqg.dynamics``   the TQG right-hand side and its building blocks.
- ``tqg.integrate``  RK4 along rays and polylines in complex time.
- ``tqg.tracker``    Theta/phi/G traces, bound monitors, c calibration.
- ``tqg.lemmas``     randomised and exhaustive inequality checks.
- ``tqg.io``         deterministic CSV/JSON artifact readers and writers.
- ``tqg.config``     experiment configs and orchestration; ``tqg.cli`` wraps it.
"""

from .errors import (
    BlowUpError,
    CalibrationError,
    ConfigError,
    GevreyOverflowError,
    GridMismatchError,
    TqgError,
)
from .spectral import (
    SpectralField,
    SpectralGrid,
    VectorSpectralField,
    from_modes,
    make_grid,
    random_gevrey_field,
    transform_to_physical,
    transform_to_spectral,
    zero_field,
)
from .norms import GevreyParams, RadiusFit, estimate_radius, gevrey_norm, sobolev_norm
from .dynamics import TQGDataSet, TQGState, advect, solve_streamfunction, tqg_rhs, velocity
from .integrate import RaySpec, Trajectory, cr_residual, integrate_polyline, integrate_ray
from .tracker import (
    GevreyTracker,
    MonitorReport,
    RadiusTrace,
    RunRecord,
    bound_monitor,
    calibrate_c,
    trace_from_record,
    track_ray,
)
from .config import ExperimentConfig, build_dataset, parse_config, run_experiment

__version__ = "0.1.0"

__all__ = [
    "BlowUpError",
    "CalibrationError",
    "ConfigError",
    "ExperimentConfig",
    "GevreyOverflowError",
    "GevreyParams",
    "GevreyTracker",
    "GridMismatchError",
    "MonitorReport",
    "RadiusFit",
    "RadiusTrace",
    "RaySpec",
    "RunRecord",
    "SpectralField",
    "SpectralGrid",
    "TQGDataSet",
    "TQGState",
    "TqgError",
    "Trajectory",
    "VectorSpectralField",
    "advect",
    "bound_monitor",
    "build_dataset",
    "calibrate_c",
    "cr_residual",
    "estimate_radius",
    "from_modes",
    "gevrey_norm",
    "integrate_polyline",
    "integrate_ray",
    "make_grid",
    "parse_config",
    "random_gevrey_field",
    "run_experiment",
    "sobolev_norm",
    "solve_streamfunction",
    "trace_from_record",
    "track_ray",
    "tqg_rhs",
    "transform_to_physical",
    "transform_to_spectral",
    "velocity",
    "zero_field",
    "__version__",
]
