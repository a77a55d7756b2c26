"""Exception types shared across the package."""


class StructuralError(ValueError):
    """Input is malformed (ragged grid, bad labels), as opposed to failing an axiom."""


class EmptySchemeError(ValueError):
    """A construction produced no non-star entries."""


class ConventionError(ValueError):
    """Exact evaluation requested where only the continuous convention applies."""


class InsufficientDataError(ValueError):
    """Fewer coded symbols than the code dimension were supplied."""


class DivisibilityError(ValueError):
    """Payload sizes do not split evenly into the required packets."""
