"""Exception types shared across the package.

The CLI maps these onto exit codes: bad input -> 1, structure the
algorithms cannot handle (non-free modules, field towers) -> 2,
truncation budget exhausted -> 3.
"""


class PfaffError(Exception):
    """Base class for all library errors."""


class InputError(PfaffError):
    """Malformed or rejected input (parse errors, ordinary points, shape)."""


class DimensionError(PfaffError):
    """Incompatible matrix/series dimensions or variable counts."""


class FieldExtensionError(PfaffError):
    """Eigenvalue field not representable under the extension policy."""


class NotUnitError(PfaffError):
    """Inversion of a series with zero constant term."""


class NotInvertibleError(PfaffError):
    """Matrix inverse does not exist in the localized ring."""


class NonIntegrableError(PfaffError):
    """Integrability condition fails (or is violated mid-reduction)."""


class ColumnModuleNotFree(PfaffError):
    """No column basis of the leading matrix admits integral cofactors."""


class RowModuleNotFree(PfaffError):
    """Row-module reduction (the transposed analog) found no basis."""


class TruncationInsufficient(PfaffError):
    """A decision needs more series terms than the current window holds."""


class ResonanceError(PfaffError):
    """Block uncoupling/endgame equations are inconsistent (resonant case)."""


class ReductionError(PfaffError):
    """Internal invariant of a reduction step failed."""
