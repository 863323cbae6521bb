"""Finite cusped spaces for relatively hyperbolic groups and coarse-geometry measurements."""

from .cusped_space import CuspedSpace, build_cusped_space, busemann_estimate
from .errors import CuspGeomError, DataError, InputError, ResourceError
from .group_ball import PresentationSpec, cayley_ball, enumerate_peripheral_cosets
from .horoball import (
    build_truncated_horoball,
    horoball_distance_estimate,
    horoball_distance_exact,
)
from .metric_graph import (
    WeightedGraph,
    four_point_delta,
    gromov_product,
    quasi_centre,
    shortest_path,
)

__all__ = [
    "CuspGeomError",
    "CuspedSpace",
    "DataError",
    "InputError",
    "PresentationSpec",
    "ResourceError",
    "WeightedGraph",
    "build_cusped_space",
    "build_truncated_horoball",
    "busemann_estimate",
    "cayley_ball",
    "enumerate_peripheral_cosets",
    "four_point_delta",
    "gromov_product",
    "horoball_distance_estimate",
    "horoball_distance_exact",
    "quasi_centre",
    "shortest_path",
]

__version__ = "0.1.0"
