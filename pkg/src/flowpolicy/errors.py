"""Exception types shared across the package."""


class SchemaError(ValueError):
    """A config file, CSV file, or manifest violates its documented schema."""


class ManifoldDomainError(ValueError):
    """A geometric operation was evaluated outside its domain (cut locus,
    zero-length projection, and similar)."""


class NumericalError(RuntimeError):
    """A numerical procedure failed: non-finite values, degenerate
    denominators, or a solver that did not converge."""
