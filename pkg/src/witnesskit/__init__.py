"""Analytic toolkit for Dirichlet characters over Q: L-function evaluation,
explicit-formula identities, smoothed prime sums, and least-witness-prime
searches with empirical constant fitting."""

from witnesskit.core import (
    AccuracyError,
    CapExhaustedError,
    CertificationError,
    ConstructionError,
    CoverageError,
    DomainError,
    IdentityViolationError,
    Precision,
    ToolkitError,
    UsageError,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "CapExhaustedError",
    "CertificationError",
    "ConstructionError",
    "CoverageError",
    "DomainError",
    "IdentityViolationError",
    "Precision",
    "ToolkitError",
    "UsageError",
    "__version__",
]
