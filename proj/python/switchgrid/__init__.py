"""Solver for systems of obstacle problems from multi-mode optimal switching.

The package wraps the C++ library: load a JSON run configuration, validate
its structural assumptions, solve the obstacle system backward in time,
calibrate explicit barrier envelopes, and cross-check values by Monte-Carlo
policy playback. Modes are 1-based at this boundary, matching the file
formats; invalid inputs raise ConfigError, solver failures SolverError, and
barrier calibration failures CalibrationError.
"""

try:
    from . import _switchgrid as _native
except ImportError:  # build-tree layout: the extension sits next to the package
    import _switchgrid as _native

Error = _native.Error
ConfigError = _native.ConfigError
SolverError = _native.SolverError
CalibrationError = _native.CalibrationError
RunConfig = _native.RunConfig
Solution = _native.Solution
BarrierSpec = _native.BarrierSpec

load_config = _native.load_config
parse_config = _native.parse_config
validate = _native.validate
solve = _native.solve
estimate = _native.estimate
compare = _native.compare
calibrate_barrier = _native.calibrate_barrier
verify_barrier = _native.verify_barrier
sandwich = _native.sandwich

__version__ = _native.__version__

__all__ = [
    "Error",
    "ConfigError",
    "SolverError",
    "CalibrationError",
    "RunConfig",
    "Solution",
    "BarrierSpec",
    "load_config",
    "parse_config",
    "validate",
    "solve",
    "estimate",
    "compare",
    "calibrate_barrier",
    "verify_barrier",
    "sandwich",
    "__version__",
]
