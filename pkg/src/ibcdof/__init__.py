"""Exact DoF inner bounds, schedules and rank-test simulation for the MISO
interference broadcast channel with delayed CSIT (MAT, truncated MAT, HC,
uMAT, cooperative bound)."""

from .dofmath import (dof_coop, dof_hc, dof_mat, dof_mat_truncated, dof_umat,
                      gap_epsilon)
from .schedule import consistency_check, enumerate_rounds, schedule_params
from .simengine import SimConfig, Variant, simulate

__all__ = [
    "dof_coop", "dof_hc", "dof_mat", "dof_mat_truncated", "dof_umat", "gap_epsilon",
    "consistency_check", "enumerate_rounds", "schedule_params",
    "SimConfig", "Variant", "simulate",
]
