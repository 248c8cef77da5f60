"""Exact stick-breaking sampling of Lévy extrema and convex minorants."""

from .errors import *  # noqa: F401,F403
from .levy_models import (
    BrownianMotion,
    CompoundPoissonDrift,
    ExponentialJumps,
    NormalJumps,
    Stable,
    TwoPointJumps,
    parse_model,
)
from .pwl_convex import PwlConvex, PwlPath, build_convex_from_faces
from .rng import RngStream
from .sb_engine import (
    MinorantSample,
    Triplet,
    sample_extremal_triplet,
    sample_minorant,
    sample_minorant_exp_horizon,
    sample_multi_drift_infima,
    vertex_process,
)

__version__ = "0.1.0"
