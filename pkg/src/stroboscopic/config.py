from __future__ import annotations

from dataclasses import dataclass

from stroboscopic.algebra import TOL_CLUSTER_REL, TOL_RANK
from stroboscopic.observability import TOL_DET


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds shared by analysis and reconstruction.

    ``cluster_rel`` is multiplied by ``max(1, spectral radius)`` to give the
    absolute eigenvalue clustering distance.
    """

    cluster_rel: float = TOL_CLUSTER_REL
    rank: float = TOL_RANK
    det: float = TOL_DET

    def __post_init__(self):
        for name in ("cluster_rel", "rank", "det"):
            if not getattr(self, name) > 0:
                raise ValueError(f"tolerance {name} must be positive")
