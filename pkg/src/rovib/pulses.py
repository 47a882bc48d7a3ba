"""Centrifuge-envelope and Gaussian intensity profiles.

The centrifuge profile is the intensity of a two-dimensional centrifuge
model: a sin^2 ramp on/off envelope multiplied by the accelerating
modulation g(t; beta) = sin^2(beta t^2). The Gaussian pulse is calibrated
against it by equal rms spectral width of the field envelopes and equal
fluence.

Times in ps, intensities in W/cm^2, frequencies in 1/ps.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.fft as sfft
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import CalibrationError, ConfigError

_SQRT_LOG2 = np.sqrt(np.log(2.0))


@dataclass(frozen=True)
class CentrifugePulse:
    """Eq-style piecewise profile with ramps of width t0 and duration t_c.

    The printed ramp-off argument pi (t_c - t)/t0 jumps to zero at the start
    of the ramp segment; the symmetric form pi (t_c - t)/(2 t0) mirrors the
    ramp-on and keeps the profile continuous, and is the default
    (symmetric_rampoff=False restores the formula as printed).
    """

    peak: float            # W/cm^2
    beta: float = 0.3      # ps^-2
    t0: float = 3.0        # ps
    t_c: float = 15.0      # ps
    symmetric_rampoff: bool = True

    def __post_init__(self):
        if self.t0 <= 0 or self.t_c <= 0 or self.beta <= 0:
            raise ConfigError("centrifuge parameters must be positive")
        if 2.0 * self.t0 > self.t_c:
            raise ConfigError("need 2 t0 <= t_c")
        if self.peak < 0:
            raise ConfigError("peak intensity must be >= 0")

    kind = "centrifuge"

    @property
    def duration(self):
        return self.t_c

    def _ramp(self, t):
        """Ramp factor of the intensity (the envelope squared, without g)."""
        t = np.asarray(t, dtype=float)
        up = np.sin(np.pi * t / (2.0 * self.t0)) ** 2
        if self.symmetric_rampoff:
            down = np.sin(np.pi * (self.t_c - t) / (2.0 * self.t0)) ** 2
        else:
            down = np.sin(np.pi * (self.t_c - t) / self.t0) ** 2
        return np.where(t <= self.t0, up,
                        np.where(t <= self.t_c - self.t0, 1.0, down))

    def intensity(self, t):
        t_arr = np.asarray(t, dtype=float)
        inside = (t_arr >= 0.0) & (t_arr <= self.t_c)
        g = np.sin(self.beta * t_arr**2) ** 2
        vals = np.where(inside, self.peak * self._ramp(t_arr) * g, 0.0)
        return float(vals) if np.isscalar(t) else vals

    def field_envelope(self, t):
        """Signed chirped quadrature whose square is the intensity profile.

        Keeping the sign of sin(beta t^2) gives the oscillating envelope its
        physical chirp band out to 2 beta t_c instead of folding it onto DC.
        """
        t_arr = np.asarray(t, dtype=float)
        inside = (t_arr >= 0.0) & (t_arr <= self.t_c)
        vals = np.where(
            inside,
            np.sqrt(self.peak * np.abs(self._ramp(t_arr)))
            * np.sin(self.beta * t_arr**2), 0.0)
        return float(vals) if np.isscalar(t) else vals

    def describe(self):
        return {"kind": self.kind, "peak": self.peak, "beta": self.beta,
                "t0": self.t0, "t_c": self.t_c,
                "symmetric_rampoff": self.symmetric_rampoff}


@dataclass(frozen=True)
class GaussianPulse:
    """I(t) = peak exp(-(t - t_g)^2 / sigma^2), truncated to [0, t_total]."""

    peak: float           # W/cm^2
    sigma: float          # ps
    t_g: float | None = None
    t_total: float | None = None

    def __post_init__(self):
        if self.sigma <= 0:
            raise ConfigError("sigma must be positive")
        if self.peak < 0:
            raise ConfigError("peak intensity must be >= 0")
        if self.t_g is None:
            # centered at twice the field-envelope FWHM so the leading edge
            # carries ~1e-10 of the peak
            object.__setattr__(self, "t_g", 2.0 * self.field_fwhm)
        if self.t_total is None:
            object.__setattr__(self, "t_total", 2.0 * self.t_g)

    kind = "gaussian"

    @property
    def fwhm(self):
        """Intensity full width at half maximum, 2 sigma sqrt(log 2)."""
        return 2.0 * self.sigma * _SQRT_LOG2

    @property
    def field_fwhm(self):
        """FWHM of the field envelope exp(-(t-t_g)^2/(2 sigma^2))."""
        return 2.0 * self.sigma * np.sqrt(2.0 * np.log(2.0))

    @property
    def duration(self):
        return self.t_total

    def intensity(self, t):
        t_arr = np.asarray(t, dtype=float)
        inside = (t_arr >= 0.0) & (t_arr <= self.t_total)
        vals = np.where(
            inside, self.peak * np.exp(-((t_arr - self.t_g) / self.sigma) ** 2),
            0.0)
        return float(vals) if np.isscalar(t) else vals

    def field_envelope(self, t):
        t_arr = np.asarray(t, dtype=float)
        inside = (t_arr >= 0.0) & (t_arr <= self.t_total)
        vals = np.where(
            inside,
            np.sqrt(self.peak)
            * np.exp(-((t_arr - self.t_g) ** 2) / (2.0 * self.sigma**2)), 0.0)
        return float(vals) if np.isscalar(t) else vals

    def describe(self):
        return {"kind": self.kind, "peak": self.peak, "sigma": self.sigma,
                "t_g": self.t_g, "t_total": self.t_total}


Pulse = CentrifugePulse | GaussianPulse


def intensity(pulse: Pulse, t):
    return pulse.intensity(t)


def fluence(pulse: Pulse):
    """Time-integrated intensity (W ps / cm^2), adaptive to <= 1e-6 relative."""
    if pulse.peak == 0.0:
        return 0.0
    if isinstance(pulse, GaussianPulse):
        breaks = [0.0, pulse.t_g, pulse.duration]
    else:
        breaks = [0.0, pulse.t0, pulse.t_c - pulse.t0, pulse.t_c]
    total = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        val, _ = quad(pulse.intensity, a, b, limit=400, epsrel=1e-9)
        total += val
    return total


def spectrum(pulse: Pulse, n_samples=4096):
    """One-sided power spectrum of the field envelope and its rms width.

    The envelope is sampled on the pulse support and zero-padded x4 before
    the transform. Returns (frequency grid in 1/ps, spectral density,
    rms width in 1/ps); the rms width is the second moment about zero, which
    matches the two-sided rms of the symmetric spectrum.
    """
    if n_samples < 1024:
        raise ConfigError("need n_samples >= 1024")
    t = np.linspace(0.0, pulse.duration, n_samples, endpoint=False)
    envelope = pulse.field_envelope(t)
    padded = 4 * n_samples
    amplitude = sfft.rfft(envelope, n=padded)
    freq = sfft.rfftfreq(padded, d=t[1] - t[0])
    power = np.abs(amplitude) ** 2
    power[1:-1] *= 2.0  # fold the negative-frequency half onto interior bins
    total = power.sum()
    rms = float(np.sqrt((freq**2 * power).sum() / total)) if total > 0 else 0.0
    return freq, power, rms


def rms_bandwidth(pulse: Pulse, n_samples=4096):
    return spectrum(pulse, n_samples)[2]


def match_pulses(centrifuge: CentrifugePulse, n_samples=8192) -> GaussianPulse:
    """Gaussian with the centrifuge's rms field bandwidth and fluence.

    sigma is solved so the rms spectral widths agree within 1 percent,
    t_g is twice the field-envelope FWHM (t_total = 2 t_g), and the peak is
    set so the fluences match within 0.1 percent.
    """
    target = rms_bandwidth(centrifuge, n_samples)

    def width_mismatch(sigma):
        return rms_bandwidth(GaussianPulse(peak=1.0, sigma=sigma),
                             n_samples) - target

    # analytic Gaussian rms 1/(2 pi sqrt(2) sigma) brackets the numeric root
    sigma_guess = 1.0 / (2.0 * np.pi * np.sqrt(2.0) * target)
    lo, hi = 0.25 * sigma_guess, 4.0 * sigma_guess
    if width_mismatch(lo) * width_mismatch(hi) > 0:
        raise CalibrationError("bandwidth solve failed to bracket",
                               achieved={"target_rms": target})
    sigma = brentq(width_mismatch, lo, hi, xtol=1e-6)

    matched = GaussianPulse(peak=1.0, sigma=sigma)
    if abs(rms_bandwidth(matched, n_samples) - target) > 0.01 * target:
        raise CalibrationError("bandwidth match outside 1 percent",
                               achieved={"sigma": sigma})
    peak = centrifuge.peak * fluence(
        replace(centrifuge, peak=1.0)) / fluence(matched)
    return GaussianPulse(peak=peak, sigma=sigma)
