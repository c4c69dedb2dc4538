"""Exception types shared across the package."""


class ConfigError(Exception):
    """Invalid or unknown configuration content."""


class DegenerateFillingError(Exception):
    """The Fermi level is degenerate; the ground state is ambiguous."""


class RegionOverlapError(Exception):
    """Regions that must be disjoint share sites."""


class InvalidPartitionError(Exception):
    """A partition violates its contract (overlapping regions, ...)."""


class IncompleteJunctionError(Exception):
    """A geometric prediction was requested for an incomplete tri-junction."""


class NumericalContractError(Exception):
    """A numerical sanity bound was violated (e.g. imaginary residue)."""


class SupportMismatchWarning(UserWarning):
    """State weight found outside the support of an embedded operator."""
