"""Shared configuration-error type for the front-end and its suites."""


class ConfigError(ValueError):
    """Invalid run configuration or command arguments."""
