"""Exception types shared across the toolkit."""


class HealthGuardError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(HealthGuardError):
    """Invalid scenario/attack configuration or config file contents."""


class DataIntegrityError(HealthGuardError):
    """Telemetry or dataset violates a structural guarantee (ordering, span, schema)."""


class StratificationError(HealthGuardError):
    """A labelled split cannot be stratified (some class has too few instances)."""


class ModelFormatError(HealthGuardError):
    """Model file is corrupt, truncated, or has an unsupported schema version."""
