"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid model, sampler, or experiment configuration."""


class DomainError(ValueError):
    """Argument outside its mathematical domain."""
