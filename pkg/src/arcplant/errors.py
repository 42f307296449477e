"""Exception taxonomy shared across the toolkit.

The CLI maps these onto stable exit codes: configuration problems exit 2,
physical-domain violations exit 3, data/ingestion problems exit 4.
"""


class ArcPlantError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(ArcPlantError):
    """Scenario/config input is invalid or internally inconsistent."""


class DomainError(ArcPlantError):
    """An operation left the physically valid domain."""


class DataError(ArcPlantError):
    """Measured or ingested data cannot be used as requested."""


class UnsustainableArcError(DomainError):
    """Arc length beyond what the supply voltage can sustain."""
