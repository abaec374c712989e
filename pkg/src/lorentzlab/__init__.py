"""lorentzlab: exact piecewise calculus and brute-force verification for
weighted Lorentz-space analysis."""

from .piecewise import (
    INF,
    Chi,
    Const,
    Curve,
    DistributionCurve,
    ExpAbs,
    InfiniteMass,
    InvShift,
    LineMeasure,
    LogPlus,
    One,
    OnePlusAbs,
    OnePlusLog,
    Power,
    PowerAbs,
    PowerXform,
    QuadratureFailure,
    StepFunction,
    StepMeasure,
    StepWeight,
    UnboundedSupport,
    Weight,
    distribution,
    double_star,
    double_star_curve,
    ext_div,
    ext_mul,
    integrate,
    one,
    parse_measure,
    parse_step_function,
    parse_weight,
    primitive,
    rearrange,
)

__version__ = "0.1.0"
