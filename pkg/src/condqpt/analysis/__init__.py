"""Sweeps over g, critical-point location and the bound machinery."""
from .bounds import CouplingBound, cross_block_coupling, kinetic_cross_block, mixing_lower_bound
from .critical import (
    CriticalEstimate,
    coexistence_analytic,
    locate_critical,
    locate_knee,
    locate_minimum,
    locate_zero,
)
from .specular import SpecularReport, modified_grover_exact, specular_split
from .sweep import SweepRow, resolve_methods, sweep, sweep_point, thermodynamic_row

__all__ = [
    "CouplingBound",
    "CriticalEstimate",
    "SpecularReport",
    "SweepRow",
    "coexistence_analytic",
    "cross_block_coupling",
    "kinetic_cross_block",
    "locate_critical",
    "locate_knee",
    "locate_minimum",
    "locate_zero",
    "mixing_lower_bound",
    "modified_grover_exact",
    "resolve_methods",
    "specular_split",
    "sweep",
    "sweep_point",
    "thermodynamic_row",
]
