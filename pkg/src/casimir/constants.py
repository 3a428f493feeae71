"""CODATA-2018 constants in SI units.

Every other module imports from here; do not re-type these literals elsewhere.
"""

import math

HBAR = 1.054571817e-34        # J s
C = 299792458.0               # m/s
K_B = 1.380649e-23            # J/K
MU0 = 1.25663706212e-6        # N/A^2
ALPHA_FS = 7.2973525693e-3    # fine-structure constant
ZETA3 = 1.2020569031595942    # Apery's constant


class PhysicalConstants:
    """Read-only bundle of the constants above, for code that wants them as one object."""

    __slots__ = ()
    hbar = HBAR
    c = C
    k_B = K_B
    mu0 = MU0
    alpha_fs = ALPHA_FS

    def __setattr__(self, name, value):
        raise AttributeError("physical constants are read-only")


CONSTANTS = PhysicalConstants()


def matsubara_frequency(T: float, l: int = 1) -> float:
    """l-th Matsubara frequency 2*pi*k_B*T*l/hbar in rad/s."""
    return 2.0 * math.pi * K_B * T * l / HBAR
