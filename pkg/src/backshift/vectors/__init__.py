from .context import ConstructionContext, apply_T, build_xq, find_index, isometry_report, phi
from .enumeration import RationalBallEnumerator, enumerate_ball
from .partition import PartitionMap

__all__ = [
    "ConstructionContext",
    "PartitionMap",
    "RationalBallEnumerator",
    "apply_T",
    "build_xq",
    "enumerate_ball",
    "find_index",
    "isometry_report",
    "phi",
]
