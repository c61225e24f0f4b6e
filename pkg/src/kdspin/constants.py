"""Physical constants.

Natural units (m = hbar = c = 1, Gaussian charge e = sqrt(alpha)) are used
everywhere except in :mod:`kdspin.experiment`, which works in SI.
"""

import math

ALPHA = 7.2973525693e-3
E_CHARGE = math.sqrt(ALPHA)

# CODATA 2018, SI
HBAR = 1.054571817e-34  # J s
ELEMENTARY_CHARGE = 1.602176634e-19  # C
SPEED_OF_LIGHT = 299792458.0  # m / s
ELECTRON_REST_ENERGY_EV = 510998.95  # eV
ELECTRON_MASS = ELECTRON_REST_ENERGY_EV * ELEMENTARY_CHARGE / SPEED_OF_LIGHT**2  # kg
VACUUM_PERMITTIVITY = 8.8541878128e-12  # F / m

# hbar / (m_e c): the reduced Compton wavelength
REDUCED_COMPTON_WAVELENGTH = HBAR / (ELECTRON_MASS * SPEED_OF_LIGHT)

# one natural time unit 1/m in seconds
TIME_UNIT_S = HBAR / (ELECTRON_REST_ENERGY_EV * ELEMENTARY_CHARGE)


def fs_to_natural(t_fs):
    return t_fs * 1e-15 / TIME_UNIT_S


def natural_to_fs(t):
    return t * TIME_UNIT_S * 1e15


def photon_energy_to_k(photon_energy_ev):
    """Photon energy in eV -> wave number in units of m."""
    return photon_energy_ev / ELECTRON_REST_ENERGY_EV
