class SurvTestError(Exception):
    """Base class for errors raised by survtest."""


class SchemaError(SurvTestError):
    """Raised when a dataset or contrast file does not match the expected schema."""


class HypothesisError(SurvTestError):
    """Raised when a hypothesis cannot be built for the given design."""


class DegenerateSampleError(SurvTestError):
    """Raised when a sample carries no information to test (e.g. no events)."""


class SimulationError(SurvTestError):
    """Raised when a simulation scenario is malformed or a sampler fails to converge."""
