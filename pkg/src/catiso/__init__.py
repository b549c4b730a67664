"""catiso: catalytic-tape isolation algorithms and experiment harness."""

from .errors import CatisoError, ConfigurationError, CorruptionError, PreconditionError
from .tape import CatalyticTape, SpaceLedger, new_tape

__version__ = "0.1.0"

__all__ = [
    "CatisoError",
    "ConfigurationError",
    "CorruptionError",
    "PreconditionError",
    "CatalyticTape",
    "SpaceLedger",
    "new_tape",
    "__version__",
]
