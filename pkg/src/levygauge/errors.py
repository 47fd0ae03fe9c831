"""Error taxonomy shared across the package.

Mirrors the CLI exit-code classes: configuration/usage problems, violated
mathematical contracts on inputs, and numerical failures during evaluation.
"""


class ConfigError(ValueError):
    """Bad configuration: unknown preset, malformed table, missing key."""


class DomainError(ValueError):
    """A point, time, or parameter lies outside the declared domain."""


class ContractError(ValueError):
    """An input violates a mathematical precondition (e.g. not antisymmetric)."""


class NumericError(RuntimeError):
    """A numerical evaluation failed (NaN, singular metric, diverging step)."""


class ClassificationError(RuntimeError):
    """Holonomy classification produced an impossible algebra dimension."""
