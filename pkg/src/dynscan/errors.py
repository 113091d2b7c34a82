"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid scan/CLI configuration (bad patch size, patch count, flags)."""


class PnmDecodeError(ValueError):
    """Malformed PNM input; the message names the offending field."""
