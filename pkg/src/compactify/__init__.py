"""Compactifications of the real line via coordinate embeddings.

Build finite models of the closure of x -> (f_0(x), f_1(x), ...) inside a
product of closed intervals, approximate the points the line gains at
infinity, test which bounded functions extend continuously, compare and
enlarge models, and chain them into inverse limits.
"""
from __future__ import annotations

__version__ = "0.1.0"

from .functions import (
    AffineImage,
    Cheb,
    Const,
    Cos,
    FunctionDescriptor,
    FunctionFamily,
    Interval,
    StereoX,
    StereoY,
    Tanh,
    chebyshev_expand,
    descriptor_from_json,
    descriptor_to_json,
    evaluate,
    range_interval,
)
from .product_space import (
    ProductPoint,
    cap_metric,
    check_ball_cylinder_inclusions,
    product_distance,
    tail_bound,
)
from .compactification import (
    BuildParams,
    CompactificationModel,
    EmbeddingMap,
    RemainderCluster,
    build_compactification,
    closure_membership,
    embed,
    load_model,
    save_model,
)
from .extension import (
    ExtensionReport,
    Verdict,
    check_extendability,
    derived_extension,
    extend_by_projection,
)
from .ordering import (
    ChebOfCoordinate,
    ComparisonWitness,
    CopyCoordinate,
    EnlargeResult,
    Incomparable,
    compare,
    enlarge,
    equivalence_check,
)
from .inverse_limit import (
    InverseSystem,
    Thread,
    apply_bond,
    chain_limit,
    lift_point,
    make_thread_from_parameter,
    verify_closedness_sample,
)

__all__ = [
    "__version__",
    "AffineImage",
    "Cheb",
    "Const",
    "Cos",
    "FunctionDescriptor",
    "FunctionFamily",
    "Interval",
    "StereoX",
    "StereoY",
    "Tanh",
    "chebyshev_expand",
    "descriptor_from_json",
    "descriptor_to_json",
    "evaluate",
    "range_interval",
    "ProductPoint",
    "cap_metric",
    "check_ball_cylinder_inclusions",
    "product_distance",
    "tail_bound",
    "BuildParams",
    "CompactificationModel",
    "EmbeddingMap",
    "RemainderCluster",
    "build_compactification",
    "closure_membership",
    "embed",
    "load_model",
    "save_model",
    "ExtensionReport",
    "Verdict",
    "check_extendability",
    "derived_extension",
    "extend_by_projection",
    "ChebOfCoordinate",
    "ComparisonWitness",
    "CopyCoordinate",
    "EnlargeResult",
    "Incomparable",
    "compare",
    "enlarge",
    "equivalence_check",
    "InverseSystem",
    "Thread",
    "apply_bond",
    "chain_limit",
    "lift_point",
    "make_thread_from_parameter",
    "verify_closedness_sample",
]
