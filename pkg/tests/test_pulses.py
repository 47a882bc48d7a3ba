import numpy as np
import pytest
from dataclasses import dataclass

from rovib.errors import ConfigError
from rovib.pulses import (CentrifugePulse, GaussianPulse, fluence,
                          match_pulses, rms_bandwidth, spectrum)


@dataclass(frozen=True)
class RectPulse:
    """Constant-envelope test pulse implementing the pulse protocol."""
    peak: float
    length: float

    @property
    def duration(self):
        return self.length

    def intensity(self, t):
        t = np.asarray(t, dtype=float)
        vals = np.where((t >= 0) & (t <= self.length), self.peak, 0.0)
        return vals

    def field_envelope(self, t):
        return np.sqrt(self.intensity(t))


def test_centrifuge_starts_at_zero():
    cp = CentrifugePulse(peak=1.0)
    assert cp.intensity(0.0) == 0.0
    assert cp.intensity(-1.0) == 0.0
    assert cp.intensity(15.001) == 0.0


def test_centrifuge_flat_segment_value():
    cp = CentrifugePulse(peak=3.0e10)
    # t = 7 ps sits on the plateau: I = peak * sin^2(beta t^2)
    expected = 3.0e10 * np.sin(0.3 * 49.0) ** 2
    assert abs(cp.intensity(7.0) - expected) < 1e-12 * 3.0e10


def test_centrifuge_printed_rampoff_formula():
    cp = CentrifugePulse(peak=1.0, symmetric_rampoff=False)
    for t in (12.5, 13.7, 14.9):
        expected = np.sin(np.pi * (15.0 - t) / 3.0) ** 2 * \
            np.sin(0.3 * t * t) ** 2
        assert abs(cp.intensity(t) - expected) < 1e-14


def test_centrifuge_continuity_at_segment_joins():
    cp = CentrifugePulse(peak=1.0)
    eps = 1e-9
    for t_join in (3.0, 12.0):
        jump = abs(cp.intensity(t_join - eps) - cp.intensity(t_join + eps))
        assert jump < 1e-7   # continuous profile: jump vanishes with eps
    # tighter statement: the limits agree to 1e-12 via the ramp factors
    for t_join in (3.0, 12.0):
        left = cp._ramp(t_join - 1e-13)
        right = cp._ramp(t_join + 1e-13)
        assert abs(left - right) < 1e-12


def test_centrifuge_validation():
    with pytest.raises(ConfigError):
        CentrifugePulse(peak=1.0, t0=8.0, t_c=15.0)
    with pytest.raises(ConfigError):
        CentrifugePulse(peak=-1.0)


def test_gaussian_leading_edge_suppression():
    gp = GaussianPulse(peak=1.0, sigma=0.142, t_g=0.671)
    assert 1.5e-10 < gp.intensity(0.0) < 2.6e-10
    # default centering lands in the same suppression regime
    gp_default = GaussianPulse(peak=1.0, sigma=0.142)
    assert 1.0e-10 < gp_default.intensity(0.0) < 3.0e-10
    assert abs(gp_default.t_total - 2.0 * gp_default.t_g) < 1e-14


def test_gaussian_fwhm_definition():
    gp = GaussianPulse(peak=2.0, sigma=0.142)
    half = gp.intensity(gp.t_g + gp.fwhm / 2.0)
    assert abs(half - 1.0) < 1e-12
    assert abs(gp.fwhm - 2.0 * 0.142 * np.sqrt(np.log(2.0))) < 1e-15


def test_fluence_gaussian_closed_form():
    gp = GaussianPulse(peak=2.5e11, sigma=0.142)
    exact = 2.5e11 * 0.142 * np.sqrt(np.pi)
    assert abs(fluence(gp) - exact) < 1e-8 * exact


def test_fluence_zero_peak():
    assert fluence(GaussianPulse(peak=0.0, sigma=0.142)) == 0.0
    assert fluence(CentrifugePulse(peak=0.0)) == 0.0


def test_fluence_ratio_matches_paper_at_default_sigma():
    cp = CentrifugePulse(peak=1.0)
    gp = GaussianPulse(peak=1.0, sigma=0.142)
    ratio = fluence(cp) / fluence(gp)
    assert abs(ratio - 24.05) < 0.005 * 24.05


def test_fluence_scales_linearly_and_shift_invariant():
    base = fluence(GaussianPulse(peak=1.0, sigma=0.2))
    assert abs(fluence(GaussianPulse(peak=3.0, sigma=0.2)) - 3.0 * base) \
        < 1e-9 * base
    shifted = GaussianPulse(peak=1.0, sigma=0.2, t_g=2.5, t_total=5.0)
    assert abs(fluence(shifted) - base) < 1e-6 * base
    assert abs(rms_bandwidth(shifted) -
               rms_bandwidth(GaussianPulse(peak=1.0, sigma=0.2,
                                           t_g=1.9, t_total=3.8))) < 2e-3


def test_match_pulses_reproduces_paper_sigma_and_tg():
    matched = match_pulses(CentrifugePulse(peak=1.0))
    assert abs(matched.sigma - 0.142) < 0.01
    assert abs(matched.t_g - 0.671) < 0.01
    assert abs(matched.t_g - 2.0 * matched.field_fwhm) < 1e-12
    assert abs(matched.t_total - 2.0 * matched.t_g) < 1e-12
    # fluences agree within 0.1 percent
    assert abs(fluence(matched) - fluence(CentrifugePulse(peak=1.0))) \
        < 1e-3 * fluence(matched)


def test_match_pulses_linear_in_peak():
    m1 = match_pulses(CentrifugePulse(peak=1.0e10))
    m2 = match_pulses(CentrifugePulse(peak=2.0e10))
    assert abs(m2.peak - 2.0 * m1.peak) < 1e-9 * m2.peak
    assert abs(m2.sigma - m1.sigma) < 1e-12


def test_gaussian_uncertainty_product():
    gp = GaussianPulse(peak=1.0, sigma=0.142)
    _freq, _power, rms = spectrum(gp, 8192)
    t = np.linspace(0.0, gp.duration, 100000)
    it = gp.intensity(t)
    t_mean = np.sum(t * it) / np.sum(it)
    t_rms = np.sqrt(np.sum((t - t_mean) ** 2 * it) / np.sum(it))
    product = t_rms * rms
    assert abs(product - 1.0 / (4.0 * np.pi)) < 0.02 / (4.0 * np.pi)


def test_centrifuge_spectral_support_tracks_chirp():
    cp = CentrifugePulse(peak=1.0)
    freq, power, _rms = spectrum(cp, 8192)
    cumulative = np.cumsum(power) / np.sum(power)
    f99 = freq[np.searchsorted(cumulative, 0.99)]
    f_inst = 2.0 * cp.beta * cp.t_c / (2.0 * np.pi)   # stationary phase
    assert 0.8 * f_inst < f99 < 1.1 * f_inst


def test_rect_envelope_main_lobe_scales_inversely_with_length():
    def main_lobe(length):
        freq, power, _ = spectrum(RectPulse(peak=1.0, length=length), 4096)
        trough = np.argmax(np.diff(power[1:]) > 0) + 1  # first local minimum
        return freq[trough]

    w1, w2 = main_lobe(4.0), main_lobe(8.0)
    assert abs(w1 / w2 - 2.0) < 0.05 * 2.0


def test_spectrum_requires_enough_samples():
    with pytest.raises(ConfigError):
        spectrum(GaussianPulse(peak=1.0, sigma=0.1), 512)
