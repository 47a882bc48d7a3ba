"""Shared fixtures and independent oracles for the test suite."""

import numpy as np
import pytest
from scipy.special import sph_harm_y

from rovib import units
from rovib.grid import ChannelSet, RadialGrid
from rovib.molecule import CurveSpec, MoleculeModel, default_model


def cos2_quadrature(n, n_prime, m, order=160):
    """<N M|cos^2 theta|N' M> by Gauss-Legendre quadrature over cos(theta).

    Independent of the closed-form implementation: builds the integrand from
    spherical harmonics at phi = 0 and carries the 2 pi azimuthal factor.
    """
    x, w = np.polynomial.legendre.leggauss(order)
    theta = np.arccos(x)
    ya = sph_harm_y(n, m, theta, 0.0)
    yb = sph_harm_y(n_prime, m, theta, 0.0)
    return float(np.real(2.0 * np.pi * np.sum(w * np.conj(ya) * x**2 * yb)))


def zero_potential_model(r_lo=2.0, r_hi=80.0, alpha_atom=0.0):
    """Free-particle model: zero potential, zero polarizabilities."""
    r = np.linspace(r_lo, r_hi, 16)
    zero = CurveSpec(kind="tabulated", table_r=r, table_values=np.zeros(16))
    did_kwargs = dict(parameters={"alpha_atom": alpha_atom})
    return MoleculeModel(
        reduced_mass=0.5 * units.MASS_RB87_AMU,
        potential=zero,
        delta_alpha=CurveSpec(kind="did_polarizability", component="delta",
                              **did_kwargs),
        alpha_perp=CurveSpec(kind="did_polarizability", component="perp",
                             **did_kwargs),
    )


class FlatPulse:
    """Constant intensity over [0, length]; minimal pulse protocol."""

    def __init__(self, peak, length):
        self.peak = peak
        self.length = length

    @property
    def duration(self):
        return self.length

    def intensity(self, t):
        t = np.asarray(t, dtype=float)
        return np.where((t >= 0) & (t <= self.length), self.peak, 0.0)

    def field_envelope(self, t):
        return np.sqrt(self.intensity(t))


def toy_morse_model(d_e_cm=2000.0, a=1.0, r_e=2.0, mass_amu=1.0,
                    alpha_atom=10.0):
    """Light toy molecule where splitting errors are visible."""
    return MoleculeModel(
        reduced_mass=mass_amu,
        potential=CurveSpec(kind="morse",
                            parameters={"d_e": d_e_cm, "a": a, "r_e": r_e}),
        delta_alpha=CurveSpec(kind="did_polarizability", component="delta",
                              parameters={"alpha_atom": alpha_atom}),
        alpha_perp=CurveSpec(kind="did_polarizability", component="perp",
                             parameters={"alpha_atom": alpha_atom}),
    )


@pytest.fixture(scope="session")
def model_seed():
    return default_model()


@pytest.fixture(scope="session")
def grid512():
    return RadialGrid(r_min=6.0, r_max=60.0, n_points=512)


@pytest.fixture(scope="session")
def channels180():
    return ChannelSet(m=0, n_max=180)


@pytest.fixture(scope="session")
def library512(model_seed, grid512, channels180):
    from rovib.eigen import build_library
    return build_library(model_seed, grid512, channels180)


@pytest.fixture(scope="session")
def small_box():
    """128-point grid with 10 channels for fast propagation tests."""
    grid = RadialGrid(r_min=6.0, r_max=60.0, n_points=128)
    channels = ChannelSet(m=0, n_max=18)
    return grid, channels


@pytest.fixture(scope="session")
def small_library(model_seed, small_box):
    from rovib.eigen import build_library
    grid, channels = small_box
    return build_library(model_seed, grid, channels)
