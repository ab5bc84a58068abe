"""Shared exception types, mapped to CLI exit codes by the command layer."""


class ConfigError(Exception):
    """Malformed or inconsistent experiment configuration (exit code 2)."""


class InvariantViolation(Exception):
    """A runtime mathematical invariant was broken (exit code 3).

    `name` identifies the violated invariant (e.g. "column-stochasticity",
    "phi-conservation", "feasibility") so diagnostics can point at it.
    """

    def __init__(self, name, message):
        self.name = name
        super().__init__(f"{name}: {message}")


class SolverNonConvergence(Exception):
    """The iterative benchmark solver exhausted its budget (exit code 4)."""
