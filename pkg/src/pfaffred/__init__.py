"""Exact reduction of integrable Pfaffian systems with normal crossings."""

from .errors import (
    ColumnModuleNotFree,
    DimensionError,
    FieldExtensionError,
    InputError,
    NonIntegrableError,
    NotInvertibleError,
    NotUnitError,
    PfaffError,
    ReductionError,
    ResonanceError,
    RowModuleNotFree,
    TruncationInsufficient,
)
from .docio import (
    generate_equivalent,
    parse_solution,
    parse_system,
    serialize_solution,
    serialize_system,
)
from .driver import (
    FormalSolution,
    ReductionTrace,
    fmfs,
    regular_endgame,
    verify_solution,
)
from .invariants import (
    ExponentialPart,
    NewtonPolygon,
    exponential_order,
    exponential_parts,
    katz_order_univariate,
    true_poincare_rank,
)
from .linalg import ConstMatrix, SeriesMatrix
from .reduction import (
    build_Q,
    build_shearing,
    column_reduce,
    eigen_shift,
    integral_cofactors,
    moser_rank,
    ramify_system,
    rank_reduce,
    rank_reduce_alt,
    split,
)
from .scalars import QQ, FieldTower, MinimalPolynomial, Scalar
from .series import INF, Series
from .system import (
    GaugeReport,
    GaugeTransformation,
    IntegrabilityReport,
    PfaffianSystem,
    apply_gauge,
    check_integrability,
    normalize_poincare,
)

__version__ = "0.1.0"

__all__ = [
    "QQ",
    "INF",
    "ColumnModuleNotFree",
    "ConstMatrix",
    "DimensionError",
    "ExponentialPart",
    "FieldExtensionError",
    "FormalSolution",
    "FieldTower",
    "GaugeReport",
    "GaugeTransformation",
    "InputError",
    "IntegrabilityReport",
    "MinimalPolynomial",
    "NewtonPolygon",
    "NonIntegrableError",
    "NotInvertibleError",
    "NotUnitError",
    "PfaffError",
    "PfaffianSystem",
    "ReductionError",
    "ReductionTrace",
    "ResonanceError",
    "RowModuleNotFree",
    "Scalar",
    "Series",
    "SeriesMatrix",
    "TruncationInsufficient",
    "apply_gauge",
    "build_Q",
    "build_shearing",
    "check_integrability",
    "column_reduce",
    "eigen_shift",
    "exponential_order",
    "exponential_parts",
    "fmfs",
    "generate_equivalent",
    "integral_cofactors",
    "katz_order_univariate",
    "moser_rank",
    "true_poincare_rank",
    "normalize_poincare",
    "parse_solution",
    "parse_system",
    "ramify_system",
    "rank_reduce",
    "rank_reduce_alt",
    "regular_endgame",
    "serialize_solution",
    "serialize_system",
    "split",
    "verify_solution",
    "__version__",
]
