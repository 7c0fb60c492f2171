"""Exact-arithmetic Fedosov deformation quantization on local symplectic charts."""

from .scalars import Scalar
from .jets import PolyJet, jet_power
from .exprs import ParseError, parse_poly, parse_scalar, print_canonical
from .geometry import (
    ChartGeometry,
    CurvatureTable,
    chart_from_json_dict,
    curvature,
    hamiltonian_field,
    load_chart,
    poisson_bracket,
    standard_symplectic_matrix,
)
from .weyl import (
    GradingError,
    GradingReport,
    WeylForm,
    adjoint_action,
    delta,
    delta_inv,
    delta_star,
    function_part,
    graded_commutator,
    grading_report,
    project_hbar,
    project_sym,
    symbol_part,
    weyl_product,
)
from .quantization import (
    FedosovConnection,
    FlatSection,
    StarExpansion,
    connection_one_form,
    covariant_derivative,
    flat_connection,
    flat_section,
    flat_section_residual,
    flatness_residual,
    metaplectic_generator,
    star_product,
    weyl_curvature,
)
from .diffop import DiffOperator
from .metaplectic import PolyWave, RepConfig, apply_operator, metaplectic_operator, rep_apply
from .cotangent import (
    BaseMetric,
    CompatibilityReport,
    CotangentQuantizer,
    check_compatibility,
    conjugate,
    geometric_operator,
    lift_connection,
    load_metric,
    metric_from_json_dict,
    q_degree,
)
from .kahler import HolomorphicStarReport, check_holomorphic_star, kahler_chart, kahler_coords

__all__ = [name for name in dir() if not name.startswith("_")]
