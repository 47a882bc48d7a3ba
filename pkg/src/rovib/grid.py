"""Discretized representation: radial Fourier grid x even-N channel basis.

Wavepackets store the reduced radial functions f_N(R, t) of
Psi = sum_N f_N(R,t)/R Y_NM, so the radial kinetic energy is a pure second
derivative applied by FFT, and the angular interaction is tridiagonal in the
channel index through the cos^2(theta) selection rules dN = 0, +-2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from . import units
from .errors import ConfigError, ShapeMismatchError
from .molecule import MoleculeModel, evaluate_curve


@dataclass(frozen=True)
class RadialGrid:
    r_min: float
    r_max: float
    n_points: int

    def __post_init__(self):
        if self.r_min <= 0 or self.r_max <= self.r_min:
            raise ConfigError("need 0 < r_min < r_max")
        if self.n_points < 16:
            raise ConfigError("need at least 16 radial points")

    @property
    def spacing(self):
        return (self.r_max - self.r_min) / self.n_points

    @property
    def points(self):
        return self.r_min + self.spacing * np.arange(self.n_points)

    def wavenumbers(self):
        """Angular wavenumbers of the periodic Fourier grid."""
        return 2.0 * np.pi * sfft.fftfreq(self.n_points, d=self.spacing)

    def describe(self):
        return {"r_min": self.r_min, "r_max": self.r_max,
                "n_points": self.n_points}


@dataclass(frozen=True)
class ChannelSet:
    """Even rotational channels N >= |M| at fixed magnetic quantum number."""

    m: int
    n_max: int

    def __post_init__(self):
        if self.n_max < abs(self.m):
            raise ConfigError("n_max must be at least |m|")

    @property
    def n_list(self):
        start = abs(self.m) + (abs(self.m) % 2)
        return tuple(range(start, self.n_max + 1, 2))

    @property
    def size(self):
        return len(self.n_list)

    def index_of(self, n):
        try:
            return self.n_list.index(n)
        except ValueError:
            raise ShapeMismatchError(f"N={n} not in channel set (M={self.m})")

    def describe(self):
        return {"m": self.m, "n_max": self.n_max}


@dataclass
class Wavepacket:
    """Complex coefficients f_N(R_i) with shape (n_points, n_channels)."""

    coefficients: np.ndarray
    time: float  # ps
    grid: RadialGrid
    channels: ChannelSet

    def __post_init__(self):
        expected = (self.grid.n_points, self.channels.size)
        if self.coefficients.shape != expected:
            raise ShapeMismatchError(
                f"coefficients shape {self.coefficients.shape}, expected {expected}")

    def norm(self):
        return float(np.sqrt(
            np.sum(np.abs(self.coefficients) ** 2) * self.grid.spacing))

    def normalized(self):
        return Wavepacket(self.coefficients / self.norm(), self.time,
                          self.grid, self.channels)

    def copy(self):
        return Wavepacket(self.coefficients.copy(), self.time,
                          self.grid, self.channels)


def _check_match(wp: Wavepacket, grid: RadialGrid):
    if wp.grid.n_points != grid.n_points or wp.grid.spacing != grid.spacing:
        raise ShapeMismatchError("wavepacket grid does not match operator grid")


def apply_radial_kinetic(wp: Wavepacket, grid: RadialGrid, mass_au: float):
    """(-1/2mu) d2/dR2 channel-wise via the Fourier grid; input unchanged."""
    _check_match(wp, grid)
    k2 = grid.wavenumbers() ** 2
    g = sfft.fft(wp.coefficients, axis=0)
    g *= (k2 / (2.0 * mass_au))[:, None]
    out = sfft.ifft(g, axis=0, overwrite_x=True)
    return Wavepacket(out, wp.time, wp.grid, wp.channels)


def centrifugal_terms(grid: RadialGrid, channels: ChannelSet, mass_au: float):
    """N(N+1)/(2 mu R^2) for every channel; shape (n_points, n_channels)."""
    n_arr = np.array(channels.n_list, dtype=float)
    return (n_arr * (n_arr + 1.0))[None, :] / (2.0 * mass_au *
                                               grid.points[:, None] ** 2)


def apply_centrifugal(wp: Wavepacket, grid: RadialGrid, mass_au: float):
    """Pointwise N(N+1)/(2 mu R^2) per channel."""
    _check_match(wp, grid)
    out = wp.coefficients * centrifugal_terms(grid, wp.channels, mass_au)
    return Wavepacket(out, wp.time, wp.grid, wp.channels)


def cos2_coupling(n: int, n_prime: int, m: int) -> float:
    """<N M | cos^2 theta | N' M>, nonzero only for N' in {N, N+-2}.

    Closed forms follow from cos^2 = 1/3 + (2/3) P2(cos theta) and the
    Wigner-3j reduction of the P2 matrix element.
    """
    if n < abs(m) or n_prime < abs(m):
        raise ConfigError("need N, N' >= |M|")
    if n == n_prime:
        return 1.0 / 3.0 + (2.0 / 3.0) * (n * (n + 1.0) - 3.0 * m * m) / (
            (2.0 * n - 1.0) * (2.0 * n + 3.0))
    if abs(n - n_prime) == 2:
        lo = min(n, n_prime)
        num = ((lo + 1.0) ** 2 - m * m) * ((lo + 2.0) ** 2 - m * m)
        den = (2.0 * lo + 1.0) * (2.0 * lo + 5.0)
        return np.sqrt(num / den) / (2.0 * lo + 3.0)
    return 0.0


def cos2_bands(channels: ChannelSet):
    """Diagonal and first-offdiagonal of cos^2 in the channel basis.

    Channels are consecutive even N, so dN = +-2 couples adjacent entries.
    """
    ns = channels.n_list
    diag = np.array([cos2_coupling(n, n, channels.m) for n in ns])
    off = np.array([cos2_coupling(ns[i], ns[i + 1], channels.m)
                    for i in range(len(ns) - 1)])
    return diag, off


def apply_interaction(wp: Wavepacket, model: MoleculeModel, intensity: float):
    """Polarizability dressing -I/(2 c eps0) [dalpha(R) cos^2 + alpha_perp(R)].

    Hermitian by construction: real radial factors times the symmetric
    tridiagonal cos^2 coupling.
    """
    if intensity < 0:
        raise ConfigError("intensity must be >= 0")
    r = wp.grid.points
    pref = units.interaction_prefactor_au(intensity)
    dal = pref * model.delta_alpha_au(r)
    aperp = pref * model.alpha_perp_au(r)
    diag, off = cos2_bands(wp.channels)

    f = wp.coefficients
    out = (aperp[:, None] + dal[:, None] * diag[None, :]) * f
    if wp.channels.size > 1:
        out[:, 1:] += dal[:, None] * off[None, :] * f[:, :-1]
        out[:, :-1] += dal[:, None] * off[None, :] * f[:, 1:]
    return Wavepacket(out, wp.time, wp.grid, wp.channels)


def kinetic_matrix(grid: RadialGrid, mass_au: float):
    """Dense Fourier-grid kinetic matrix, identical to apply_radial_kinetic.

    Built by transforming the identity so the eigensolver and the propagator
    share one discrete operator; symmetrized to kill FFT round-off.
    """
    n = grid.n_points
    k2 = grid.wavenumbers() ** 2 / (2.0 * mass_au)
    t = sfft.ifft(k2[:, None] * sfft.fft(np.eye(n), axis=0), axis=0).real
    return 0.5 * (t + t.T)


class HamiltonianTerms:
    """Precomputed grid arrays for fast repeated H applications.

    Works on transposed, C-contiguous coefficient blocks of shape
    (n_channels, n_points); the propagator owns the layout conversion.
    """

    def __init__(self, model: MoleculeModel, grid: RadialGrid,
                 channels: ChannelSet):
        self.grid = grid
        self.channels = channels
        self.mass_au = model.reduced_mass_au
        r = grid.points
        self.k2 = grid.wavenumbers() ** 2 / (2.0 * self.mass_au)
        self.v_static = (evaluate_curve(model.potential, r)[None, :]
                         + centrifugal_terms(grid, channels, self.mass_au).T)
        self.dalpha = evaluate_curve(model.delta_alpha, r)
        self.aperp = evaluate_curve(model.alpha_perp, r)
        diag, off = cos2_bands(channels)
        self.cos2_diag = diag
        self.cos2_off = off

    def diagonal(self, pref_au: float):
        """Channel-diagonal part of H at interaction prefactor pref_au."""
        return self.v_static + pref_au * (
            self.aperp[None, :] + self.cos2_diag[:, None] * self.dalpha[None, :])

    def apply(self, f, pref_au: float, diag=None):
        """H f for coefficients f of shape (n_channels, n_points)."""
        if diag is None:
            diag = self.diagonal(pref_au)
        g = sfft.fft(f, axis=1)
        g *= self.k2[None, :]
        out = sfft.ifft(g, axis=1, overwrite_x=True)
        out += diag * f
        if len(self.cos2_off):
            mix = pref_au * self.cos2_off[:, None] * self.dalpha[None, :]
            out[1:, :] += mix * f[:-1, :]
            out[:-1, :] += mix * f[1:, :]
        return out

    def potential_matrices(self, pref_au: float):
        """Stacked (n_points, n_ch, n_ch) channel matrices of V + interaction."""
        nch, npts = self.channels.size, self.grid.n_points
        v = np.zeros((npts, nch, nch))
        idx = np.arange(nch)
        v[:, idx, idx] = self.diagonal(pref_au).T
        if nch > 1:
            offs = pref_au * self.cos2_off[None, :] * self.dalpha[:, None]
            v[:, idx[:-1], idx[1:]] = offs
            v[:, idx[1:], idx[:-1]] = offs
        return v
