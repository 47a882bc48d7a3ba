"""Projections onto field-free states and derived distributions.

Post-pulse analysis follows the projection picture: the wavepacket is
expanded over bound eigenstates, giving vibrational/rotational weight
distributions, the mean rotational excitation, the continuum (dissociation)
complement, the alignment, and Maxwell-Boltzmann thermal averages.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import units
from .eigen import EigenLibrary
from .errors import (EmptyTableError, EnsembleCoverageError,
                     ShapeMismatchError)
from .grid import Wavepacket, cos2_bands


@dataclass
class ProjectionTable:
    """Coefficients C(nu, N) of a wavepacket over the bound eigenstates."""

    time: float                    # ps
    nu: np.ndarray                 # int array
    n: np.ndarray                  # int array
    coefficients: np.ndarray       # complex array
    initial_state: tuple | None = None

    @property
    def weights(self):
        return np.abs(self.coefficients) ** 2

    @property
    def norm_captured(self):
        return float(self.weights.sum())

    def weight(self, nu: int, n: int) -> float:
        mask = (self.nu == nu) & (self.n == n)
        return float(self.weights[mask].sum())

    def coefficient(self, nu: int, n: int) -> complex:
        mask = (self.nu == nu) & (self.n == n)
        idx = np.nonzero(mask)[0]
        return complex(self.coefficients[idx[0]]) if len(idx) else 0.0j


def project(wp: Wavepacket, library: EigenLibrary,
            initial_state=None) -> ProjectionTable:
    """C(nu, N) = <phi_nu,N | f_N> over every bound state of every channel."""
    if (wp.grid.n_points != library.grid.n_points
            or wp.channels.n_list != library.channels.n_list):
        raise ShapeMismatchError("wavepacket and library use different bases")
    h = wp.grid.spacing
    nus, ns, coeffs = [], [], []
    for idx, n in enumerate(wp.channels.n_list):
        ch = library.channel(n)
        if ch.vectors.shape[1] == 0:
            continue
        c = ch.vectors.T @ wp.coefficients[:, idx] * h
        nus.append(np.arange(len(c)))
        ns.append(np.full(len(c), n))
        coeffs.append(c)
    return ProjectionTable(
        time=wp.time,
        nu=np.concatenate(nus) if nus else np.empty(0, dtype=int),
        n=np.concatenate(ns) if ns else np.empty(0, dtype=int),
        coefficients=np.concatenate(coeffs) if coeffs else np.empty(0, complex),
        initial_state=initial_state,
    )


def vib_distribution(table: ProjectionTable, nu: int) -> float:
    """V(nu) = sum_N |C(nu, N)|^2."""
    return float(table.weights[table.nu == nu].sum())


def vib_distribution_all(table: ProjectionTable) -> dict[int, float]:
    out = {}
    for nu, w in zip(table.nu, table.weights):
        out[int(nu)] = out.get(int(nu), 0.0) + float(w)
    return dict(sorted(out.items()))


def rot_distribution(table: ProjectionTable, n: int) -> float:
    """Accumulative weight of rotational excitation N across all bands."""
    return float(table.weights[table.n == n].sum())


def rot_distribution_all(table: ProjectionTable) -> dict[int, float]:
    out = {}
    for n, w in zip(table.n, table.weights):
        out[int(n)] = out.get(int(n), 0.0) + float(w)
    return dict(sorted(out.items()))


def mean_rotation(table: ProjectionTable) -> float:
    """<N> over the accumulative rotational distribution."""
    total = table.weights.sum()
    if len(table.weights) == 0 or total <= 0.0:
        raise EmptyTableError("mean rotation of an empty projection table")
    return float((table.n * table.weights).sum() / total)


def dissociation_probability(table: ProjectionTable) -> float:
    """P_D = 1 - sum over bound weights, clipped at tiny negative round-off."""
    p = 1.0 - table.norm_captured
    if p < 0.0:
        if p < -1.0e-9:
            return p  # surfaced: projection exceeded unity beyond round-off
        p = 0.0
    return p


def alignment(wp: Wavepacket) -> float:
    """<cos^2 theta> of a normalized wavepacket."""
    diag, off = cos2_bands(wp.channels)
    f = wp.coefficients
    h = wp.grid.spacing
    val = float(np.sum(diag * np.sum(np.abs(f) ** 2, axis=0)) * h)
    if len(off):
        cross = np.sum(np.conj(f[:, :-1]) * f[:, 1:], axis=0)
        val += 2.0 * h * float(np.real(np.sum(off * cross)))
    return val


def alignment_from_table(table: ProjectionTable, library: EigenLibrary,
                         overlaps=None) -> float:
    """Alignment recomputed from a projection table (bound subspace only)."""
    return float(spectral_alignment_series(
        table, library, np.array([table.time]), overlaps)[0])


def cross_channel_overlaps(library: EigenLibrary):
    """Radial overlap matrices between bound states of adjacent channels."""
    h = library.grid.spacing
    out = []
    n_list = library.channels.n_list
    for i in range(len(n_list) - 1):
        a = library.channel(n_list[i]).vectors
        b = library.channel(n_list[i + 1]).vectors
        out.append(a.T @ b * h)
    return out


def _split_by_channel(table: ProjectionTable, library: EigenLibrary):
    """Coefficient and energy vectors per channel, ordered like the basis."""
    coeffs, energies = [], []
    for n in library.channels.n_list:
        mask = table.n == n
        order = np.argsort(table.nu[mask])
        coeffs.append(table.coefficients[mask][order])
        energies.append(library.channel(n).energies[:mask.sum()])
    return coeffs, energies


def spectral_alignment_series(table: ProjectionTable, library: EigenLibrary,
                              times_ps, overlaps=None) -> np.ndarray:
    """<cos^2>(t) under exact free evolution of the projected coefficients.

    After the pulse each coefficient keeps its modulus and advances its phase
    as exp(-i E (t - t_table)); same-channel contributions are then constant
    and only the dN = 2 cross terms beat.
    """
    if overlaps is None:
        overlaps = cross_channel_overlaps(library)
    diag, off = cos2_bands(library.channels)
    coeffs, energies = _split_by_channel(table, library)
    times = np.asarray(times_ps, dtype=float)
    dt_au = units.ps_to_au(times - table.time)

    static = sum(d * float(np.sum(np.abs(c) ** 2))
                 for d, c in zip(diag, coeffs))
    out = np.full(len(times), static)
    for i, o in enumerate(off):
        ca, cb = coeffs[i], coeffs[i + 1]
        if len(ca) == 0 or len(cb) == 0:
            continue
        ov = overlaps[i][:len(ca), :len(cb)]
        ea, eb = energies[i], energies[i + 1]
        # M[a,b] = conj(C_a) O[a,b] C_b; phases e^{i(E_a - E_b) t}
        m = np.conj(ca)[:, None] * ov * cb[None, :]
        de = ea[:, None] - eb[None, :]
        for j, tau in enumerate(dt_au):
            out[j] += 2.0 * o * float(np.real(np.sum(m * np.exp(1j * de * tau))))
    return out


def advance_table(table: ProjectionTable, library: EigenLibrary,
                  t_ps: float) -> ProjectionTable:
    """Phase-advance a projection table to time t under free evolution."""
    dt_au = units.ps_to_au(t_ps - table.time)
    energies = np.array([library.energy(int(nu), int(n))
                         for nu, n in zip(table.nu, table.n)])
    return ProjectionTable(
        time=t_ps, nu=table.nu.copy(), n=table.n.copy(),
        coefficients=table.coefficients * np.exp(-1j * energies * dt_au),
        initial_state=table.initial_state,
    )


@dataclass(frozen=True)
class ThermalSpec:
    """Thermal ensemble description restricted to one vibrational band."""

    temperature: float          # K
    n_t: int = 24               # rotational cutoff
    nu0: int = 0

    def __post_init__(self):
        if self.temperature <= 0:
            raise EnsembleCoverageError(["temperature must be positive"])


def ensemble_members(spec: ThermalSpec, channels_m0_even=True):
    """(nu0, N0, |M0|) labels covering the thermal sample."""
    members = []
    for n0 in range(0, spec.n_t + 1, 2):
        for m0 in range(0, n0 + 1):
            members.append((spec.nu0, n0, m0))
    return members


def partition_function(spec: ThermalSpec, library: EigenLibrary) -> float:
    """Z = sum over even N0 <= N_T of (2 N0 + 1) exp[(E00 - E_{nu0,N0})/kT]."""
    kt = units.KB_CM_PER_K * spec.temperature
    e00 = units.au_to_cm(library.energy(0, 0))
    z = 0.0
    for n0 in range(0, spec.n_t + 1, 2):
        e = units.au_to_cm(library.energy(spec.nu0, n0))
        z += (2.0 * n0 + 1.0) * np.exp((e00 - e) / kt)
    return z


def thermal_weight(spec: ThermalSpec, library: EigenLibrary,
                   state) -> float:
    """Maxwell-Boltzmann weight W of one (nu0, N0, |M0|) initial state."""
    nu0, n0, m0 = state
    kt = units.KB_CM_PER_K * spec.temperature
    e00 = units.au_to_cm(library.energy(0, 0))
    e = units.au_to_cm(library.energy(nu0, n0))
    g = 1.0 if m0 == 0 else 2.0
    return g * np.exp((e00 - e) / kt) / partition_function(spec, library)


def thermal_average(results: dict, spec: ThermalSpec,
                    library: EigenLibrary) -> dict[int, float]:
    """Weighted average of per-initial-state rotational distributions.

    results maps (nu0, N0, |M0|) to a {N: weight} rotational distribution;
    +-M0 pairs are covered once through the degeneracy factor g.
    """
    members = ensemble_members(spec)
    missing = [m for m in members if m not in results]
    if missing:
        raise EnsembleCoverageError(missing)
    out: dict[int, float] = {}
    for member in members:
        w = thermal_weight(spec, library, member)
        for n, val in results[member].items():
            out[int(n)] = out.get(int(n), 0.0) + w * float(val)
    return dict(sorted(out.items()))
