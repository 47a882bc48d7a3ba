"""Time evolution under the pulsed Hamiltonian.

The main propagator expands exp(-i H dt) in Chebyshev polynomials of the
spectrally rescaled Hamiltonian over piecewise-constant intensity steps; a
Strang split-operator propagator serves as an independent cross-check. After
the pulse the projected coefficients evolve by exact spectral phases, which
is cheap enough to follow alignment revivals over nanoseconds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft
from scipy.special import jv

from . import units
from .errors import ConfigError, NumericalError, SpectralWindowError
from .grid import (ChannelSet, HamiltonianTerms, RadialGrid, Wavepacket,
                   centrifugal_terms, cos2_bands)
from .molecule import MoleculeModel, evaluate_curve
from .observables import (ProjectionTable, cross_channel_overlaps,
                          dissociation_probability, project,
                          spectral_alignment_series, vib_distribution_all)

WINDOW_MARGIN = 1.05


@dataclass
class PropagationPlan:
    """Stepping control for one propagation.

    dt caps the intensity-sampling step; steps are refined adaptively so the
    intensity never jumps by more than intensity_jump_fraction of the peak
    across a step (the centrifuge modulation oscillates faster as t grows).
    """

    pulse: object
    dt: float = 0.001                   # ps
    post_pulse_time: float = 0.0        # ps
    chebyshev_tolerance: float = 1.0e-12
    observable_stride: int = 25
    intensity_jump_fraction: float = 0.02
    post_pulse_samples: int = 1024
    energy_window: tuple | None = None  # (E_min, E_max) in au
    store_projections: bool = False

    def __post_init__(self):
        if self.dt <= 0:
            raise ConfigError("dt must be positive")
        if self.observable_stride < 1:
            raise ConfigError("observable_stride must be >= 1")


@dataclass
class ObservableSeries:
    times: np.ndarray
    norm: np.ndarray
    alignment: np.ndarray
    pdiss: np.ndarray | None = None
    band_populations: np.ndarray | None = None   # (n_samples, n_bands)


@dataclass
class Trajectory:
    final: Wavepacket
    series: ObservableSeries
    post_series: ObservableSeries | None = None
    final_projection: ProjectionTable | None = None
    projections: list = field(default_factory=list)
    steps_taken: int = 0


def static_bound(model: MoleculeModel, grid: RadialGrid, channels: ChannelSet,
                 peak_intensity: float = 0.0):
    """Rigorous spectral window of H over the whole pulse, with margin.

    E_max adds the largest kinetic eigenvalue to the largest grid value of
    potential + centrifugal + interaction; E_min is the smallest grid value
    of the same potentials (kinetic is non-negative).
    """
    r = grid.points
    mass = model.reduced_mass_au
    t_max = float(np.max(grid.wavenumbers() ** 2)) / (2.0 * mass)
    v_static = (evaluate_curve(model.potential, r)[:, None]
                + centrifugal_terms(grid, channels, mass))
    pref = units.interaction_prefactor_au(peak_intensity)
    dal = evaluate_curve(model.delta_alpha, r)
    aperp = evaluate_curve(model.alpha_perp, r)
    # cos^2 spectrum lies in [0, 1]: interaction eigenvalues per radius span
    # pref * [alpha_perp, alpha_perp + dalpha] in either order of sign
    cand = np.stack([pref * aperp, pref * (aperp + dal)])
    int_lo, int_hi = cand.min(axis=0), cand.max(axis=0)
    e_max = t_max + float(np.max(v_static + int_hi[:, None]))
    e_min = float(np.min(v_static + int_lo[:, None]))
    mid = 0.5 * (e_max + e_min)
    half = 0.5 * (e_max - e_min) * WINDOW_MARGIN
    return mid - half, mid + half


def build_step_schedule(pulse, plan: PropagationPlan):
    """(t_start, dt) pairs covering the pulse support.

    Each step obeys the intensity-jump bound checked at quarter points, which
    also guards against aliasing the sin^2(beta t^2) oscillations.
    """
    duration = pulse.duration
    peak = pulse.peak
    cap = plan.intensity_jump_fraction * peak if peak > 0 else np.inf
    steps = []
    t = 0.0
    dt_min = plan.dt / 1024.0
    while t < duration - 1e-12:
        dt = min(plan.dt, duration - t)
        while dt > dt_min:
            probes = pulse.intensity(t + dt * np.array([0.0, 0.25, 0.5, 0.75, 1.0]))
            if np.max(probes) - np.min(probes) <= cap:
                break
            dt *= 0.5
        steps.append((t, dt))
        t += dt
    return steps


def _chebyshev_coefficients(alpha: float, tol: float):
    """Complex expansion coefficients (2 - d_k0) (-i)^k J_k(alpha)."""
    k_max = int(abs(alpha)) + 40
    while True:
        orders = np.arange(k_max + 1)
        bessel = jv(orders, alpha)
        small = np.abs(bessel) < tol
        cut = None
        for k in range(max(int(abs(alpha)), 1), k_max):
            if small[k] and small[k + 1]:
                cut = k + 1
                break
        if cut is not None:
            break
        k_max *= 2
        if k_max > 100000:
            raise NumericalError("Chebyshev expansion did not converge")
    orders = orders[:cut + 1]
    coeff = 2.0 * (-1j) ** orders * bessel[:cut + 1]
    coeff[0] *= 0.5
    return coeff


class ChebyshevStepper:
    """exp(-i H dt) on transposed coefficient blocks at fixed intensity."""

    def __init__(self, terms: HamiltonianTerms, window, tol):
        self.terms = terms
        self.e_min, self.e_max = window
        if not self.e_max > self.e_min:
            raise ConfigError("energy window must have E_max > E_min")
        self.e_mid = 0.5 * (self.e_max + self.e_min)
        self.e_half = 0.5 * (self.e_max - self.e_min)
        self.tol = tol

    def step(self, f, pref_au: float, dt_au: float):
        alpha = self.e_half * dt_au
        coeff = _chebyshev_coefficients(alpha, self.tol)
        diag = self.terms.diagonal(pref_au)
        limit = 16.0 * float(np.max(np.abs(f))) + 1e-30

        def h_norm(x):
            return (self.terms.apply(x, pref_au, diag=diag)
                    - self.e_mid * x) / self.e_half

        phi_prev = f
        phi = h_norm(f)
        out = coeff[0] * phi_prev + coeff[1] * phi
        for c in coeff[2:]:
            phi_next = 2.0 * h_norm(phi) - phi_prev
            phi_prev = phi
            phi = phi_next
            out += c * phi
            if np.max(np.abs(phi.real)) > limit:
                raise SpectralWindowError(
                    "Chebyshev recursion diverged: spectrum outside window")
        out *= np.exp(-1j * self.e_mid * dt_au)
        return out


def _sample_indices(n_steps: int, stride: int):
    idx = set(range(0, n_steps + 1, stride))
    idx.add(n_steps)
    return sorted(idx)


class _Recorder:
    def __init__(self, plan, grid, channels, library):
        self.plan = plan
        self.h = grid.spacing
        self.grid = grid
        self.channels = channels
        self.library = library
        self.diag, self.off = cos2_bands(channels)
        self.n_bands = (library.max_nu() + 1) if library is not None else 0
        self.times, self.norms, self.cos2 = [], [], []
        self.pdiss, self.bands = [], []
        self.projections = []

    def record(self, t_ps, f_t):
        norm2 = float(np.sum(np.abs(f_t) ** 2)) * self.h
        if not np.isfinite(norm2):
            raise NumericalError("norm is not finite", step=len(self.times))
        cos2 = float(np.sum(self.diag * np.sum(np.abs(f_t) ** 2, axis=1))) * self.h
        if len(self.off):
            cross = np.sum(np.conj(f_t[:-1, :]) * f_t[1:, :], axis=1)
            cos2 += 2.0 * self.h * float(np.real(np.sum(self.off * cross)))
        self.times.append(t_ps)
        self.norms.append(np.sqrt(norm2))
        self.cos2.append(cos2)
        if self.library is not None:
            wp = Wavepacket(np.ascontiguousarray(f_t.T), t_ps, self.grid,
                            self.channels)
            table = project(wp, self.library)
            self.pdiss.append(dissociation_probability(table))
            vib = vib_distribution_all(table)
            row = np.zeros(self.n_bands)
            for nu, w in vib.items():
                if nu < self.n_bands:
                    row[nu] = w
            self.bands.append(row)
            if self.plan.store_projections:
                self.projections.append(table)

    def series(self):
        return ObservableSeries(
            times=np.array(self.times),
            norm=np.array(self.norms),
            alignment=np.array(self.cos2),
            pdiss=np.array(self.pdiss) if self.pdiss else None,
            band_populations=np.vstack(self.bands) if self.bands else None,
        )


def propagate(wp0: Wavepacket, plan: PropagationPlan, model: MoleculeModel,
              grid: RadialGrid, channels: ChannelSet,
              library=None) -> Trajectory:
    """Chebyshev propagation through the pulse, then spectral free flight.

    Intensity is held at its midpoint value across each step. When an eigen
    library is supplied, band populations and the bound-projection complement
    are streamed at the observable stride, and post_pulse_time is covered by
    exact phase evolution of the projected coefficients.
    """
    terms = HamiltonianTerms(model, grid, channels)
    window = plan.energy_window or static_bound(model, grid, channels,
                                                plan.pulse.peak)
    stepper = ChebyshevStepper(terms, window, plan.chebyshev_tolerance)
    schedule = build_step_schedule(plan.pulse, plan)
    recorder = _Recorder(plan, grid, channels, library)

    f = np.ascontiguousarray(wp0.coefficients.T).astype(complex)
    t_ps = wp0.time
    recorder.record(t_ps, f)
    samples = set(_sample_indices(len(schedule), plan.observable_stride))
    for i, (t_start, dt) in enumerate(schedule, start=1):
        i_mid = plan.pulse.intensity(t_start + 0.5 * dt)
        pref = units.interaction_prefactor_au(i_mid)
        try:
            f = stepper.step(f, pref, units.ps_to_au(dt))
        except SpectralWindowError:
            raise
        except FloatingPointError as exc:  # pragma: no cover
            raise NumericalError(str(exc), step=i)
        t_ps = wp0.time + t_start + dt
        if i in samples:
            recorder.record(t_ps, f)

    final = Wavepacket(np.ascontiguousarray(f.T), t_ps, grid, channels)
    trajectory = Trajectory(final=final, series=recorder.series(),
                            projections=recorder.projections,
                            steps_taken=len(schedule))
    if library is not None:
        trajectory.final_projection = project(final, library)
    if plan.post_pulse_time > 0.0:
        if library is None:
            raise ConfigError("post-pulse spectral evolution needs a library")
        table = trajectory.final_projection
        times = np.linspace(t_ps, t_ps + plan.post_pulse_time,
                            plan.post_pulse_samples)
        cos2 = spectral_alignment_series(table, library, times)
        trajectory.post_series = ObservableSeries(
            times=times,
            norm=np.full(len(times), trajectory.final.norm()),
            alignment=cos2,
        )
    return trajectory


def propagate_split_operator(wp0: Wavepacket, plan: PropagationPlan,
                             model: MoleculeModel, grid: RadialGrid,
                             channels: ChannelSet, library=None) -> Trajectory:
    """Strang splitting exp(-iV dt/2) exp(-iT dt) exp(-iV dt/2).

    V collects the potential, centrifugal and interaction terms and is
    exponentiated per radial point through small dense eigenproblems; T is
    the Fourier-grid kinetic phase. Second-order accurate in dt; used as the
    independent oracle against the Chebyshev path.
    """
    terms = HamiltonianTerms(model, grid, channels)
    schedule = build_step_schedule(plan.pulse, plan)
    recorder = _Recorder(plan, grid, channels, library)

    f = wp0.coefficients.astype(complex).copy()   # (n_points, n_channels)
    kin_phase_cache = {}
    t_ps = wp0.time
    recorder.record(t_ps, np.ascontiguousarray(f.T))
    samples = set(_sample_indices(len(schedule), plan.observable_stride))
    for i, (t_start, dt) in enumerate(schedule, start=1):
        dt_au = units.ps_to_au(dt)
        if dt not in kin_phase_cache:
            kin_phase_cache[dt] = np.exp(-1j * terms.k2 * dt_au)[:, None]
        i_mid = plan.pulse.intensity(t_start + 0.5 * dt)
        pref = units.interaction_prefactor_au(i_mid)
        v = terms.potential_matrices(pref)
        w, s = np.linalg.eigh(v)
        half = np.einsum("ijk,ik->ij", s,
                         np.exp(-0.5j * w * dt_au)
                         * np.einsum("ikj,ik->ij", s, f))
        g = sfft.fft(half, axis=0)
        g *= kin_phase_cache[dt]
        mid = sfft.ifft(g, axis=0, overwrite_x=True)
        f = np.einsum("ijk,ik->ij", s,
                      np.exp(-0.5j * w * dt_au)
                      * np.einsum("ikj,ik->ij", s, mid))
        t_ps = wp0.time + t_start + dt
        if i in samples:
            recorder.record(t_ps, np.ascontiguousarray(f.T))
        if not np.isfinite(f[0, 0]):
            raise NumericalError("NaN during split-operator step", step=i)

    final = Wavepacket(f, t_ps, grid, channels)
    trajectory = Trajectory(final=final, series=recorder.series(),
                            projections=recorder.projections,
                            steps_taken=len(schedule))
    if library is not None:
        trajectory.final_projection = project(final, library)
    return trajectory
