"""Figure kit for the ro-vibrational dynamics CSV/JSON outputs.

Renders paper-style figures (state-weight heatmaps, alignment traces with
rigid-rotor overlays, scan summaries and thermal distributions) from the
documented delimited files, deterministically.
"""

__version__ = "0.1.0"
