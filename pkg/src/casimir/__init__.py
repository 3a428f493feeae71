"""Lifshitz pressure sectors and oscillating-dipole fields for metal plates."""

from .dipole import DipoleConfig, field_sweep, lateral_field
from .lifshitz import Geometry, PressureBreakdown, classical_limit, ideal_pressure, pressure_breakdown, \
    pressure_matsubara, pressure_sector
from .models import COPPER, COPPER_PLASMA, Drude, GrapheneTransverse, IdealMetal, NonlocalPhenom, Plasma, \
    Tabulated, load_tabulated, permittivity, zero_frequency_class
from .reflection import ReflectionInput, fresnel, perp_wavenumbers

__version__ = "0.1.0"
