"""Unit conversions between atomic units and the external unit system.

All internal computations run in Hartree atomic units (hbar = m_e = e = 1).
External interfaces use cm^-1 for energies, ps for times, W/cm^2 for
intensities, bohr for lengths and amu for masses.
"""

from __future__ import annotations

# CODATA 2018
HARTREE_CM = 219474.6313632          # cm^-1 per hartree
BOHR_ANGSTROM = 0.529177210903       # angstrom per bohr
AMU_ME = 1822.888486209              # electron masses per amu
AU_TIME_S = 2.4188843265857e-17      # seconds per atomic time unit
AU_INTENSITY_WCM2 = 3.50944758e16    # W/cm^2 per atomic intensity unit
C_CM_PER_S = 2.99792458e10           # speed of light, cm/s
KB_CM_PER_K = 0.6950348004           # Boltzmann constant, cm^-1 per K

PS_AU = 1.0e-12 / AU_TIME_S          # atomic time units per ps

MASS_RB87_AMU = 86.909180527


def cm_to_au(energy_cm):
    return energy_cm / HARTREE_CM


def au_to_cm(energy_au):
    return energy_au * HARTREE_CM


def ps_to_au(t_ps):
    return t_ps * PS_AU


def au_to_ps(t_au):
    return t_au / PS_AU


def amu_to_au(mass_amu):
    return mass_amu * AMU_ME


def angstrom_to_bohr(r_angstrom):
    return r_angstrom / BOHR_ANGSTROM


def intensity_to_au(intensity_wcm2):
    return intensity_wcm2 / AU_INTENSITY_WCM2


def interaction_prefactor_au(intensity_wcm2):
    """Coefficient of (dalpha cos^2 + alpha_perp) in the dressing term.

    The cycle-averaged polarizability interaction is
    -I/(2 c eps0) (dalpha cos^2 + alpha_perp); for I in atomic intensity
    units this equals -(I_au / 2) with polarizabilities in a.u.
    """
    return -0.5 * intensity_to_au(intensity_wcm2)


def rotational_period_ps(b_cm):
    """Rotational revival period tau = 1/(2 c B) for B in cm^-1."""
    return 1.0 / (2.0 * C_CM_PER_S * b_cm) * 1.0e12
