"""Ro-vibrational quantum dynamics of a diatomic molecule in strong laser pulses.

The package propagates coupled radial/angular wavepackets on a Fourier grid
crossed with an even-N spherical-harmonic channel basis, for centrifuge-style
and Gaussian intensity envelopes, and analyzes the dressed dynamics in terms
of field-free ro-vibrational eigenstates.
"""

__version__ = "0.1.0"
