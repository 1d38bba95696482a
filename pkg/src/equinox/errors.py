"""Exception taxonomy shared across the solver library."""


class EquinoxError(Exception):
    """Base class for all library errors."""


class GeometryError(EquinoxError):
    """Convex-geometric operation failed (projection, nets, vertex enumeration)."""


class PreferenceError(EquinoxError):
    """Demand computation failed (empty budget, satiation, bad inputs)."""


class FixedPointError(EquinoxError):
    """Fixed-point search or approximate-zero bracketing failed."""


class EquilibriumError(EquinoxError):
    """Economy validation or certificate verification failed."""


class SchemaError(EquinoxError):
    """Scenario or certificate file does not match the expected schema."""
