"""Exception types raised by the tracking routines."""

import numpy as np


class InvalidDimensionError(ValueError):
    """Shapes or sizes are inconsistent with the requested operation."""


class InvalidConfigError(ValueError):
    """A configuration value is outside its admissible range."""


class IndeterminateStatisticError(ArithmeticError):
    """The detection ratio cannot be formed (non-positive denominator)."""


class DegenerateDirectionError(ArithmeticError):
    """The added direction carries no energy and cannot be identified."""


class RankDeficiencyError(np.linalg.LinAlgError):
    """A least-squares system does not have full column rank."""
