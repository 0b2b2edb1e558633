"""Error bounds and receiver simulations for single-shot quantum ranging."""

from .errors import CertificateError, DomainError, NumericalError, RangekitError
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CertificateError",
    "DomainError",
    "NumericalError",
    "RangekitError",
    "__version__",
]
