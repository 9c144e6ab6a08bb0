class ConfigurationError(ValueError):
    """Invalid or contradictory simulation settings."""
