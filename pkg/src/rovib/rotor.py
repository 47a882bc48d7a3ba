"""Rigid-rotor reduced model with vibrationally averaged constants.

A pure rotor in the even-N spherical-harmonic basis whose rotational
constant and polarizabilities are diagonal band averages of the full model,
propagated with a short-iterative Krylov (Lanczos) scheme over the same
piecewise-constant intensity steps as the grid propagator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import units
from .eigen import AveragedConstants
from .errors import ConfigError, NumericalError
from .grid import ChannelSet, cos2_bands
from .propagator import PropagationPlan, build_step_schedule


@dataclass
class RotorState:
    """Complex amplitudes over the even-N channels of one vibrational band."""

    coefficients: np.ndarray
    channels: ChannelSet
    band: int = 0
    time: float = 0.0    # ps

    def __post_init__(self):
        if len(self.coefficients) != self.channels.size:
            raise ConfigError("coefficient length does not match channel set")

    def norm(self):
        return float(np.linalg.norm(self.coefficients))

    def populations(self):
        return np.abs(self.coefficients) ** 2


def pure_state(channels: ChannelSet, n: int, band=0) -> RotorState:
    c = np.zeros(channels.size, dtype=complex)
    c[channels.index_of(n)] = 1.0
    return RotorState(c, channels, band=band)


class RotorHamiltonian:
    """B_nu N(N+1) plus the averaged polarizability dressing, tridiagonal."""

    def __init__(self, channels: ChannelSet, constants: AveragedConstants,
                 band: int):
        b_cm, dalpha, aperp = constants.band(band)
        self.channels = channels
        self.b_au = units.cm_to_au(b_cm)
        self.dalpha = dalpha
        self.aperp = aperp
        n = np.array(channels.n_list, dtype=float)
        self.rot_diag = self.b_au * n * (n + 1.0)
        self.cos2_diag, self.cos2_off = cos2_bands(channels)

    def apply(self, c, intensity: float):
        pref = units.interaction_prefactor_au(intensity)
        out = (self.rot_diag + pref * (self.aperp + self.dalpha *
                                       self.cos2_diag)) * c
        if len(self.cos2_off):
            mix = pref * self.dalpha * self.cos2_off
            out[1:] += mix * c[:-1]
            out[:-1] += mix * c[1:]
        return out

    def dense(self, intensity: float):
        pref = units.interaction_prefactor_au(intensity)
        d = self.rot_diag + pref * (self.aperp + self.dalpha * self.cos2_diag)
        m = np.diag(d)
        if len(self.cos2_off):
            off = pref * self.dalpha * self.cos2_off
            m += np.diag(off, 1) + np.diag(off, -1)
        return m


def rotor_hamiltonian_apply(state: RotorState, constants: AveragedConstants,
                            intensity: float) -> RotorState:
    """H^R applied once; used directly in tests and by the Krylov stepper."""
    ham = RotorHamiltonian(state.channels, constants, state.band)
    return RotorState(ham.apply(state.coefficients, intensity),
                      state.channels, state.band, state.time)


def rotor_alignment(state: RotorState) -> float:
    """<cos^2 theta> = sum c*_N c_N' <N|cos^2|N'>."""
    diag, off = cos2_bands(state.channels)
    c = state.coefficients
    val = float(np.sum(diag * np.abs(c) ** 2))
    if len(off):
        val += 2.0 * float(np.real(np.sum(off * np.conj(c[:-1]) * c[1:])))
    return val


def _lanczos_step(ham: RotorHamiltonian, c, intensity, dt_au, dim_max,
                  tol=1.0e-12, dim_start=12):
    """One exp(-i H dt) application in an adaptive Krylov subspace."""
    norm0 = np.linalg.norm(c)
    if norm0 == 0.0:
        return c
    dim = min(dim_start, len(c))
    while True:
        q = np.empty((dim + 1, len(c)), dtype=complex)
        alphas = np.zeros(dim)
        betas = np.zeros(dim)
        q[0] = c / norm0
        breakdown = dim
        for j in range(dim):
            w = ham.apply(q[j], intensity)
            if j > 0:
                w -= betas[j - 1] * q[j - 1]
            alphas[j] = np.real(np.vdot(q[j], w))
            w -= alphas[j] * q[j]
            # full reorthogonalization keeps the small basis clean
            w -= q[:j + 1].T @ (np.conj(q[:j + 1]) @ w)
            beta = np.linalg.norm(w)
            betas[j] = beta
            if beta < 1.0e-14:
                breakdown = j + 1
                break
            q[j + 1] = w / beta
        m = breakdown
        t = np.diag(alphas[:m]) + np.diag(betas[:m - 1], 1) + \
            np.diag(betas[:m - 1], -1)
        evals, evecs = scipy.linalg.eigh(t)
        small = evecs @ (np.exp(-1j * evals * dt_au) * np.conj(evecs[0, :]))
        # happy breakdown or a full-space basis make the step exact
        exact = m < dim or m >= len(c)
        residual = 0.0 if exact else abs(small[-1])
        if exact or residual < tol:
            return norm0 * (q[:m].T @ small)
        if dim >= min(dim_max, len(c)):
            raise NumericalError(
                f"Krylov step did not converge (residual {residual:.2e})")
        dim = min(dim * 2, dim_max, len(c))


def propagate_rotor(state0: RotorState, plan: PropagationPlan,
                    constants: AveragedConstants, krylov_dim=12,
                    krylov_dim_max=64):
    """Short-iterative Krylov propagation through the pulse plus free flight.

    Returns (trajectory records, final state). Post-pulse evolution applies
    the exact diagonal phases exp(-i B N(N+1) t).
    """
    ham = RotorHamiltonian(state0.channels, constants, state0.band)
    schedule = build_step_schedule(plan.pulse, plan)
    c = state0.coefficients.astype(complex).copy()
    times = [state0.time]
    cos2 = [rotor_alignment(state0)]
    norms = [np.linalg.norm(c)]
    t_ps = state0.time
    sample_every = plan.observable_stride
    for i, (t_start, dt) in enumerate(schedule, start=1):
        i_mid = plan.pulse.intensity(t_start + 0.5 * dt)
        c = _lanczos_step(ham, c, i_mid, units.ps_to_au(dt),
                          dim_max=krylov_dim_max, dim_start=krylov_dim)
        if not np.all(np.isfinite(c)):
            raise NumericalError("NaN in rotor propagation", step=i)
        t_ps = state0.time + t_start + dt
        if i % sample_every == 0 or i == len(schedule):
            state_i = RotorState(c, state0.channels, state0.band, t_ps)
            times.append(t_ps)
            cos2.append(rotor_alignment(state_i))
            norms.append(state_i.norm())

    final = RotorState(c, state0.channels, state0.band, t_ps)
    if plan.post_pulse_time > 0.0:
        post_times = np.linspace(t_ps, t_ps + plan.post_pulse_time,
                                 plan.post_pulse_samples)
        for t in post_times[1:]:
            ct = free_rotor_advance(final, ham, t)
            times.append(t)
            cos2.append(rotor_alignment(
                RotorState(ct, state0.channels, state0.band, t)))
            norms.append(float(np.linalg.norm(ct)))
    return {
        "times": np.array(times),
        "alignment": np.array(cos2),
        "norm": np.array(norms),
    }, final


def free_rotor_advance(state: RotorState, ham: RotorHamiltonian,
                       t_ps: float):
    """Coefficients phase-advanced to t under the field-free rotor."""
    dt_au = units.ps_to_au(t_ps - state.time)
    return state.coefficients * np.exp(-1j * ham.rot_diag * dt_au)


def rotor_alignment_series(final: RotorState, constants: AveragedConstants,
                           times_ps):
    """<cos^2>(t) under free evolution from a post-pulse rotor state."""
    ham = RotorHamiltonian(final.channels, constants, final.band)
    out = np.empty(len(times_ps))
    for i, t in enumerate(np.asarray(times_ps, dtype=float)):
        c = free_rotor_advance(final, ham, t)
        out[i] = rotor_alignment(RotorState(c, final.channels, final.band, t))
    return out
