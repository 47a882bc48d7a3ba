"""Synthetic schema-conformant inputs for figure tests."""

import numpy as np
import pytest


def write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join("%.12g" % x if isinstance(x, float) else str(x)
                              for x in row))
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def reference_run(tmp_path):
    """A miniature run directory covering every consumed schema."""
    rng = np.random.default_rng(42)
    out = tmp_path / "run"
    out.mkdir()

    rows = []
    for t in (0.0, 0.5, 1.0):
        for nu in range(4):
            for n in range(0, 12, 2):
                w = float(rng.uniform(0, 1)) * np.exp(-nu - n / 4)
                c = np.sqrt(w)
                rows.append((t, nu, n, c, 0.0, w))
    write_csv(out / "final_projection.csv",
              ("t", "nu", "N", "re", "im", "weight"), rows)

    t = np.linspace(0.0, 2.0, 60)
    write_csv(out / "series.csv", ("t", "norm", "cos2", "pdiss"),
              [(float(x), 1.0, float(1/3 + 0.2*np.sin(3*x)), 0.0)
               for x in t])
    write_csv(out / "rotor_series.csv", ("t", "cos2"),
              [(float(x), float(1/3 + 0.19*np.sin(3*x))) for x in t])

    scan = []
    for pulse, peak in (("centrifuge", 5.0e10), ("gaussian", 1.2e12)):
        for nu0 in (0, 10, 25, 39):
            scan.append((pulse, peak, nu0, float(40*np.exp(-nu0/15)),
                         float(0.2*np.exp(-((nu0-22)/10)**2)),
                         0.1, 0.02, 1.0))
    write_csv(out / "scan_summary.csv",
              ("pulse", "peak", "nu0", "mean_rotation", "pdiss", "v1", "v2",
               "final_norm"), scan)

    thermal = []
    for temp in (0.5, 2.0):
        for n in range(0, 60, 2):
            thermal.append((temp, n, float(np.exp(-((n-40)/12)**2))))
    write_csv(out / "thermal_rotdist.csv", ("T", "N", "weight"), thermal)
    return out
