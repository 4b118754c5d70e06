"""Package-level exception types."""


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration (CLI exit code 2)."""


class NumericalAbort(RuntimeError):
    """Integration produced an unusable state: NaN, trace collapse,
    positivity violation, or Fock-truncation leakage (CLI exit code 3)."""
