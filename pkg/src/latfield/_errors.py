"""Shared exception types.

ModelError covers bad model definitions and structural misuse (wrong
dimensions, wrong structure kind, missing tabulated lags, missing
classifier metadata).  NumericalError covers runtime numerical failures
(non-embeddable covariances, quadrature non-convergence, degenerate
statistics).  ConfigError carries the full list of schema violations
found while parsing an experiment config.
"""


class ModelError(ValueError):
    pass


class NumericalError(RuntimeError):
    pass


class ConfigError(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
