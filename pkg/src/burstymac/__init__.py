"""Degrees-of-freedom analysis of the K-user bursty MIMO multiple access channel with a relay."""

from .core import (
    ActivityDistribution,
    AntennaConfig,
    make_custom,
    make_dependent,
    make_independent,
    marginal_activity_prob,
    marginalize,
)
from .gains import delta_dof, delta_dof_dep, delta_dof_ind, peak_gain
from .region import contains, cut_bound, region, sum_dof, sum_dof_no_relay
from .sim import simulate
from .threshold import classify, collision_free_threshold, is_collision_free

__all__ = [
    "ActivityDistribution",
    "AntennaConfig",
    "classify",
    "collision_free_threshold",
    "contains",
    "cut_bound",
    "delta_dof",
    "delta_dof_dep",
    "delta_dof_ind",
    "is_collision_free",
    "make_custom",
    "make_dependent",
    "make_independent",
    "marginal_activity_prob",
    "marginalize",
    "peak_gain",
    "region",
    "simulate",
    "sum_dof",
    "sum_dof_no_relay",
]
