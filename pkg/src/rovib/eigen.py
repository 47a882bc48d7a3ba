"""Field-free ro-vibrational eigenstates, bound census and matrix elements.

Each channel Hamiltonian T_R + N(N+1)/(2 mu R^2) + V(R) is diagonalized
densely in the Fourier-grid representation, so every bound state of every
channel is available for wavepacket projections. Completed libraries are
immutable and are cached on disk keyed by a provenance hash of the model,
grid and channel set.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg

from . import units
from .errors import NumericalError, StateLookupError
from .grid import ChannelSet, RadialGrid, Wavepacket, centrifugal_terms, kinetic_matrix
from .molecule import CurveSpec, MoleculeModel, evaluate_curve

ARCHIVE_VERSION = 1

# Bound states whose tail at r_max exceeds this fraction of their peak are
# flagged box-contaminated (they remain classified bound by energy).
TAIL_CLEAN_FRACTION = 1.0e-6


def solve_channel(model: MoleculeModel, grid: RadialGrid, n: int):
    """All eigenpairs of one rotational channel, sorted by energy.

    Returns (energies_au, vectors) with vectors[:, j] normalized against the
    grid weight: sum phi^2 dr = 1. Signs are fixed so the largest-magnitude
    component is positive, which keeps archives byte-reproducible.
    """
    r = grid.points
    v = evaluate_curve(model.potential, r)
    v = v + n * (n + 1) / (2.0 * model.reduced_mass_au * r**2)
    h = kinetic_matrix(grid, model.reduced_mass_au)
    h[np.diag_indices_from(h)] += v
    try:
        energies, vectors = scipy.linalg.eigh(h)
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover
        raise NumericalError(f"diagonalization failed for channel N={n}: {exc}")
    vectors = vectors / np.sqrt(grid.spacing)
    peak = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[peak, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return energies, vectors * signs


@dataclass
class ChannelStates:
    """Bound eigenpairs of a single channel."""

    n: int
    energies: np.ndarray       # au, ascending; bound states only
    vectors: np.ndarray        # (n_points, n_bound)
    tail_clean: np.ndarray     # bool per state


class EigenLibrary:
    """Bound eigenstates of every channel plus cached derived constants."""

    def __init__(self, model: MoleculeModel, grid: RadialGrid,
                 channels: ChannelSet, channel_states: dict[int, ChannelStates]):
        self.model = model
        self.grid = grid
        self.channels = channels
        self._states = channel_states
        self.provenance_hash = library_hash(model, grid, channels)

    def channel(self, n: int) -> ChannelStates:
        if n not in self._states:
            raise StateLookupError(f"channel N={n} not in library")
        return self._states[n]

    def bound_count(self, n: int) -> int:
        return len(self.channel(n).energies)

    def energy(self, nu: int, n: int) -> float:
        ch = self.channel(n)
        if nu >= len(ch.energies):
            raise StateLookupError(f"state (nu={nu}, N={n}) is not bound")
        return float(ch.energies[nu])

    def state(self, nu: int, n: int) -> np.ndarray:
        ch = self.channel(n)
        if nu >= ch.vectors.shape[1]:
            raise StateLookupError(f"state (nu={nu}, N={n}) is not bound")
        return ch.vectors[:, nu]

    def eigenstate_wavepacket(self, nu: int, n: int, time=0.0) -> Wavepacket:
        """The (nu, N) eigenstate as a normalized wavepacket."""
        coeff = np.zeros((self.grid.n_points, self.channels.size),
                         dtype=complex)
        coeff[:, self.channels.index_of(n)] = self.state(nu, n)
        return Wavepacket(coeff, time, self.grid, self.channels)

    def max_nu(self) -> int:
        return self.bound_count(self.channels.n_list[0]) - 1

    def iter_states(self):
        for n in self.channels.n_list:
            ch = self._states[n]
            for nu in range(len(ch.energies)):
                yield nu, n, float(ch.energies[nu])


def build_library(model: MoleculeModel, grid: RadialGrid,
                  channels: ChannelSet) -> EigenLibrary:
    """Diagonalize every channel and keep the bound subspaces."""
    threshold = model.threshold_au
    states = {}
    for n in channels.n_list:
        energies, vectors = solve_channel(model, grid, n)
        nb = int(np.searchsorted(energies, threshold))
        vec = np.ascontiguousarray(vectors[:, :nb])
        peaks = np.max(np.abs(vec), axis=0) if nb else np.empty(0)
        tails = np.abs(vec[-1, :]) if nb else np.empty(0)
        clean = tails < TAIL_CLEAN_FRACTION * np.maximum(peaks, 1e-300)
        states[n] = ChannelStates(n=n, energies=energies[:nb].copy(),
                                  vectors=vec, tail_clean=clean)
    return EigenLibrary(model, grid, channels, states)


def bound_census(library: EigenLibrary) -> dict[int, int]:
    """Map nu -> largest even N whose channel still binds that nu."""
    census = {}
    for n in library.channels.n_list:
        nb = library.bound_count(n)
        for nu in range(nb):
            census[nu] = max(census.get(nu, -1), n)
    return census


def radial_matrix_element(library: EigenLibrary, f, state_a, state_b) -> float:
    """Grid quadrature of <phi_a | f(R) | phi_b> between bound states.

    Reduced radial functions already carry the R weight of the full
    wavefunction (phi_full = f_N/R with volume element R^2 dR), so the plain
    sum phi_a f phi_b dr equals the R^2-weighted integral of the full radial
    parts.
    """
    nu_a, n_a = state_a
    nu_b, n_b = state_b
    phi_a = library.state(nu_a, n_a)
    phi_b = library.state(nu_b, n_b)
    if isinstance(f, CurveSpec):
        values = evaluate_curve(f, library.grid.points)
    elif callable(f):
        values = f(library.grid.points)
    else:
        values = np.asarray(f, dtype=float)
    return float(np.sum(phi_a * values * phi_b) * library.grid.spacing)


@dataclass
class AveragedConstants:
    """Per-band vibrationally averaged rotational constant and polarizabilities."""

    b_nu_cm: np.ndarray      # cm^-1
    delta_alpha_nu: np.ndarray  # a.u.
    alpha_perp_nu: np.ndarray   # a.u.

    def band(self, nu: int):
        if nu >= len(self.b_nu_cm):
            raise StateLookupError(f"no averaged constants for band nu={nu}")
        return (float(self.b_nu_cm[nu]), float(self.delta_alpha_nu[nu]),
                float(self.alpha_perp_nu[nu]))


def averaged_constants(library: EigenLibrary,
                       model: MoleculeModel) -> AveragedConstants:
    """B_nu and <dalpha>_nu, <alpha_perp>_nu from N=0 diagonal elements."""
    n0 = library.channels.n_list[0]
    mu = model.reduced_mass_au
    n_states = library.bound_count(n0)
    b = np.empty(n_states)
    da = np.empty(n_states)
    ap = np.empty(n_states)
    r = library.grid.points
    inv_r2 = 1.0 / r**2
    dal = evaluate_curve(model.delta_alpha, r)
    aperp = evaluate_curve(model.alpha_perp, r)
    for nu in range(n_states):
        phi2 = library.state(nu, n0) ** 2 * library.grid.spacing
        b[nu] = units.au_to_cm(np.sum(phi2 * inv_r2) / (2.0 * mu))
        da[nu] = np.sum(phi2 * dal)
        ap[nu] = np.sum(phi2 * aperp)
    return AveragedConstants(b_nu_cm=b, delta_alpha_nu=da, alpha_perp_nu=ap)


def measure_calibration(model: MoleculeModel, grid: RadialGrid,
                        with_census=False) -> dict:
    """Spectroscopic observables the calibration loop steers against."""
    energies, vectors = solve_channel(model, grid, 0)
    threshold = model.threshold_au
    nb = int(np.searchsorted(energies, threshold))
    phi0 = vectors[:, 0]
    b0 = units.au_to_cm(
        np.sum(phi0**2 * grid.spacing / grid.points**2)
        / (2.0 * model.reduced_mass_au))
    out = {
        "bound_count": nb,
        "vib_splitting_cm": units.au_to_cm(energies[1] - energies[0]),
        "b0_cm": b0,
    }
    if with_census:
        out["n_max_bound"] = _nmax_ground(model, grid)
    return out


def _nmax_ground(model: MoleculeModel, grid: RadialGrid) -> int:
    """Largest even N with any bound level, by bisection over channels."""
    threshold = model.threshold_au

    def has_bound(n):
        energies, _ = solve_channel(model, grid, n)
        return energies[0] < threshold

    lo, hi = 0, 400
    if not has_bound(lo):
        return -1
    while hi - lo > 2:
        mid = (lo + hi) // 2
        mid -= mid % 2
        if has_bound(mid):
            lo = mid
        else:
            hi = mid
    return lo


def library_hash(model: MoleculeModel, grid: RadialGrid,
                 channels: ChannelSet) -> str:
    payload = json.dumps({
        "model": model.describe(),
        "grid": grid.describe(),
        "channels": channels.describe(),
        "archive_version": ARCHIVE_VERSION,
    }, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()


def save_library(library: EigenLibrary, path):
    """Persist bound states to a portable npz archive with provenance."""
    path = Path(path)
    payload = {
        "meta": np.frombuffer(json.dumps({
            "archive_version": ARCHIVE_VERSION,
            "provenance_hash": library.provenance_hash,
            "model": library.model.describe(),
            "grid": library.grid.describe(),
            "channels": library.channels.describe(),
        }, sort_keys=True).encode(), dtype=np.uint8),
    }
    for n in library.channels.n_list:
        ch = library.channel(n)
        payload[f"energies_{n}"] = ch.energies
        payload[f"vectors_{n}"] = ch.vectors
        payload[f"tail_clean_{n}"] = ch.tail_clean
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savez_compressed(path, **payload)


def load_library(path, model: MoleculeModel, grid: RadialGrid,
                 channels: ChannelSet) -> EigenLibrary | None:
    """Load an archive if it matches the requested provenance, else None."""
    path = Path(path)
    if not path.exists():
        return None
    with np.load(path) as data:
        meta = json.loads(bytes(data["meta"]).decode())
        if meta.get("provenance_hash") != library_hash(model, grid, channels):
            return None
        states = {}
        for n in channels.n_list:
            states[n] = ChannelStates(
                n=n,
                energies=data[f"energies_{n}"],
                vectors=data[f"vectors_{n}"],
                tail_clean=data[f"tail_clean_{n}"],
            )
    return EigenLibrary(model, grid, channels, states)


def export_levels_csv(library: EigenLibrary, path):
    """CSV table of (nu, N, E_cm, tail_clean) for every bound state."""
    from .runner import write_csv  # shared fixed-format writer

    rows = []
    for n in library.channels.n_list:
        ch = library.channel(n)
        for nu in range(len(ch.energies)):
            rows.append((nu, n, units.au_to_cm(ch.energies[nu]),
                         int(ch.tail_clean[nu])))
    write_csv(path, ("nu", "N", "E_cm", "tail_clean"), rows)
