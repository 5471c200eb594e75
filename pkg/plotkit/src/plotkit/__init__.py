"""Figure generation from rodwave CSV/JSON artifacts.

Consumes only the public file contract (trajectory CSV, sweep CSV,
thresholds JSON); never imports the simulation package.
"""

__version__ = "0.1.0"

from .schema import SchemaError, validate_sweep, validate_trajectory

__all__ = ["__version__", "SchemaError", "validate_sweep", "validate_trajectory"]
