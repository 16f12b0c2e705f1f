"""Interactive lossless coding with decoder side information over LDPC codes
with syndrome accumulation."""
from .errors import ConstructionError, DomainError, ResourceError, UsageError

__version__ = "0.1.0"

__all__ = ["ConstructionError", "DomainError", "ResourceError", "UsageError", "__version__"]
