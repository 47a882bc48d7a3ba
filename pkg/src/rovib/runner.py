"""Configuration, orchestration and persistence for simulation jobs.

Jobs are described by a YAML file (model / grid / pulse / propagation / job
sections), eigen libraries are cached on disk keyed by provenance hash, and
every job emits fixed-format CSV tables plus a JSON manifest with checksums.
Numeric CSV payloads are byte-reproducible for identical configurations.
"""

from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from . import __version__, units
from .eigen import (EigenLibrary, averaged_constants, bound_census,
                    build_library, export_levels_csv, library_hash,
                    load_library, save_library)
from .errors import ConfigError, RovibError
from .grid import ChannelSet, RadialGrid
from .molecule import (DEFAULT_ALPHA_ATOM, calibrate_default_model,
                       default_model, load_tabulated_curve, tabulated_model)
from .observables import (ThermalSpec, dissociation_probability,
                          ensemble_members, mean_rotation, project,
                          rot_distribution_all, thermal_average,
                          thermal_weight, vib_distribution_all)
from .propagator import PropagationPlan, propagate
from .pulses import CentrifugePulse, GaussianPulse, fluence, match_pulses, spectrum
from .rotor import propagate_rotor, pure_state, rotor_alignment_series

CSV_FORMAT = "%.12g"

DEFAULTS = {
    "model": {"kind": "builtin-calibrated", "alpha_atom": DEFAULT_ALPHA_ATOM},
    "grid": {"r_min": 6.0, "r_max": 60.0, "n_points": 512, "n_max": 180, "m": 0},
    "pulse": {"kind": "centrifuge", "peak": 4.158e10, "beta": 0.3, "t0": 3.0,
              "t_c": 15.0, "symmetric_rampoff": True},
    "propagation": {"dt": 0.001, "chebyshev_tolerance": 1.0e-12,
                    "post_pulse_time": 0.0, "observable_stride": 25,
                    "rigid_rotor_compare": False, "post_pulse_samples": 1024},
    "job": {"type": "single", "initial_state": [0, 0, 0]},
}


@dataclass
class RunConfig:
    raw: dict
    path: str = ""

    def section(self, name) -> dict:
        merged = dict(DEFAULTS.get(name, {}))
        merged.update(self.raw.get(name, {}) or {})
        return merged

    @property
    def output_dir(self) -> Path:
        return Path(self.raw.get("output_dir", "out"))

    @property
    def cache_dir(self) -> Path:
        cache = self.raw.get("cache_dir")
        return Path(cache) if cache else self.output_dir / "cache"

    @property
    def workers(self) -> int:
        return int(self.raw.get("workers", 1))

    def config_hash(self) -> str:
        payload = json.dumps(self.raw, sort_keys=True, default=str)
        return hashlib.sha256(payload.encode()).hexdigest()


_STRING_KEYS = {"kind", "type", "file", "length_unit", "value_unit",
                "output_dir", "cache_dir", "name"}


def _coerce_numbers(node, key=None):
    """Undo YAML-1.1 parsing of floats like 2.0e11 into strings."""
    if isinstance(node, dict):
        return {k: _coerce_numbers(v, k) for k, v in node.items()}
    if isinstance(node, list):
        return [_coerce_numbers(v, key) for v in node]
    if isinstance(node, str) and key not in _STRING_KEYS:
        try:
            return float(node)
        except ValueError:
            return node
    return node


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    with open(path, "r", encoding="utf-8") as fh:
        raw = yaml.safe_load(fh) or {}
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    raw = _coerce_numbers(raw)
    for key in raw:
        if key not in ("model", "grid", "pulse", "propagation", "job",
                       "output_dir", "cache_dir", "workers", "deterministic"):
            raise ConfigError(f"unknown config section {key!r}")
    return RunConfig(raw=raw, path=str(path))


def build_model(config: RunConfig):
    sec = config.section("model")
    kind = sec.get("kind", "builtin-calibrated")
    if kind == "builtin-calibrated":
        return calibrate_default_model(grid=build_grid(config),
                                       alpha_atom=sec["alpha_atom"])
    if kind == "builtin":
        return default_model(alpha_atom=sec["alpha_atom"],
                             potential_params=sec.get("potential_params"))
    if kind == "tabulated":
        curves = {}
        for name in ("potential", "delta_alpha", "alpha_perp"):
            entry = sec.get(name)
            if not entry or "file" not in entry:
                raise ConfigError(f"tabulated model needs a {name} file entry")
            if not Path(entry["file"]).exists():
                raise ConfigError(f"curve file {entry['file']} does not exist")
            curves[name] = load_tabulated_curve(
                entry["file"],
                length_unit=entry.get("length_unit", "bohr"),
                value_unit=entry.get("value_unit", "au"))
        if "reduced_mass" not in sec:
            raise ConfigError("tabulated model needs reduced_mass (amu)")
        return tabulated_model(sec["reduced_mass"], curves["potential"],
                               curves["delta_alpha"], curves["alpha_perp"])
    raise ConfigError(f"unknown model kind {kind!r}")


def build_grid(config: RunConfig) -> RadialGrid:
    sec = config.section("grid")
    return RadialGrid(r_min=sec["r_min"], r_max=sec["r_max"],
                      n_points=sec["n_points"])


def build_channels(config: RunConfig, m_override=None) -> ChannelSet:
    sec = config.section("grid")
    m = sec["m"] if m_override is None else m_override
    return ChannelSet(m=m, n_max=sec["n_max"])


def build_pulse(config: RunConfig, kind=None, peak=None):
    sec = config.section("pulse")
    kind = kind or sec.get("kind", "centrifuge")
    if kind == "centrifuge":
        return CentrifugePulse(
            peak=peak if peak is not None else sec["peak"],
            beta=sec.get("beta", 0.3), t0=sec.get("t0", 3.0),
            t_c=sec.get("t_c", 15.0),
            symmetric_rampoff=sec.get("symmetric_rampoff", True))
    if kind == "gaussian":
        return GaussianPulse(
            peak=peak if peak is not None else sec["peak"],
            sigma=sec.get("sigma", 0.142), t_g=sec.get("t_g"),
            t_total=sec.get("t_total"))
    if kind == "matched-gaussian":
        cp = build_pulse(config, kind="centrifuge", peak=peak)
        matched = match_pulses(cp)
        if sec.get("sigma_override"):
            matched = GaussianPulse(peak=matched.peak,
                                    sigma=sec["sigma_override"])
        return matched
    raise ConfigError(f"unknown pulse kind {kind!r}")


def build_plan(config: RunConfig, pulse) -> PropagationPlan:
    sec = config.section("propagation")
    return PropagationPlan(
        pulse=pulse, dt=sec["dt"],
        post_pulse_time=sec["post_pulse_time"],
        chebyshev_tolerance=sec["chebyshev_tolerance"],
        observable_stride=sec["observable_stride"],
        post_pulse_samples=sec.get("post_pulse_samples", 1024),
        store_projections=True)


def get_library(model, grid, channels, cache_dir) -> EigenLibrary:
    """Cache hit/miss is decided solely by the provenance hash."""
    cache_dir = Path(cache_dir)
    path = cache_dir / f"eigenlib_{library_hash(model, grid, channels)}.npz"
    lib = load_library(path, model, grid, channels)
    if lib is None:
        lib = build_library(model, grid, channels)
        save_library(lib, path)
    return lib


def format_value(x):
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return CSV_FORMAT % float(x)
    return str(x)


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_value(x) for x in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _file_entry(path, base):
    data = Path(path).read_bytes()
    return {"path": str(Path(path).relative_to(base)),
            "sha256": hashlib.sha256(data).hexdigest(),
            "bytes": len(data)}


@dataclass
class RunManifest:
    data: dict

    def save(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.data, indent=2, sort_keys=True) + "\n",
                        encoding="utf-8")
        return path


def _series_rows(series):
    pdiss = series.pdiss if series.pdiss is not None else \
        np.zeros(len(series.times))
    return [(t, n, a, p) for t, n, a, p in
            zip(series.times, series.norm, series.alignment, pdiss)]


def _write_distribution(out_dir, name, dist, dense_keys):
    dense = [(k, dist.get(k, 0.0)) for k in dense_keys]
    sparse = [(k, w) for k, w in dense if w > 1.0e-10]
    files = [write_csv(out_dir / f"{name}.csv", ("key", "weight"), dense),
             write_csv(out_dir / f"{name}_sparse.csv", ("key", "weight"),
                       sparse)]
    return files


def _projection_rows(tables):
    rows = []
    for table in tables:
        order = np.lexsort((table.nu, table.n))
        for i in order:
            c = table.coefficients[i]
            rows.append((table.time, int(table.nu[i]), int(table.n[i]),
                         c.real, c.imag, abs(c) ** 2))
    return rows


def run_single(config: RunConfig, out_dir=None, initial_state=None,
               pulse=None, shared=None):
    """One propagation: streams, final projections, distributions, summary."""
    out_dir = Path(out_dir or config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    nu0, n0, m0 = initial_state or config.section("job").get(
        "initial_state", [0, 0, 0])

    if shared is None:
        model = build_model(config)
        grid = build_grid(config)
    else:
        model, grid = shared["model"], shared["grid"]
    channels = build_channels(config, m_override=m0)
    library = get_library(model, grid, channels, config.cache_dir)
    pulse = pulse or build_pulse(config)
    plan = build_plan(config, pulse)

    wp0 = library.eigenstate_wavepacket(nu0, n0)
    trajectory = propagate(wp0, plan, model, grid, channels, library=library)

    files = [write_csv(out_dir / "series.csv", ("t", "norm", "cos2", "pdiss"),
                       _series_rows(trajectory.series))]
    if trajectory.series.band_populations is not None:
        rows = []
        for t, band_row in zip(trajectory.series.times,
                               trajectory.series.band_populations):
            rows.extend((t, nu, w) for nu, w in enumerate(band_row))
        files.append(write_csv(out_dir / "band_populations.csv",
                               ("t", "nu", "weight"), rows))
    files.append(write_csv(out_dir / "projections.csv",
                           ("t", "nu", "N", "re", "im", "weight"),
                           _projection_rows(trajectory.projections)))
    table = trajectory.final_projection
    files.append(write_csv(out_dir / "final_projection.csv",
                           ("t", "nu", "N", "re", "im", "weight"),
                           _projection_rows([table])))
    vib = vib_distribution_all(table)
    files.extend(_write_distribution(out_dir, "final_vib_distribution", vib,
                                     list(range(library.max_nu() + 1))))
    rot = rot_distribution_all(table)
    files.extend(_write_distribution(out_dir, "final_rot_distribution", rot,
                                     list(channels.n_list)))
    if trajectory.post_series is not None:
        files.append(write_csv(
            out_dir / "post_series.csv", ("t", "norm", "cos2", "pdiss"),
            _series_rows(trajectory.post_series)))

    prop_sec = config.section("propagation")
    if prop_sec.get("rigid_rotor_compare"):
        constants = averaged_constants(library, model)
        state0 = pure_state(channels, n0, band=nu0)
        records, _final = propagate_rotor(state0, plan, constants)
        files.append(write_csv(out_dir / "rotor_series.csv", ("t", "cos2"),
                               list(zip(records["times"],
                                        records["alignment"]))))

    summary = {
        "initial_state": [int(nu0), int(n0), int(m0)],
        "pulse": pulse.describe(),
        "final_norm": trajectory.final.norm(),
        "mean_rotation": mean_rotation(table),
        "pdiss": dissociation_probability(table),
        "vib_distribution": {str(k): v for k, v in vib.items()},
        "steps": trajectory.steps_taken,
    }
    return files, summary, library


def run(config: RunConfig) -> RunManifest:
    """Execute the configured job and write its manifest."""
    t_start = time.perf_counter()
    job = config.section("job")
    job_type = job.get("type", "single")
    out_dir = config.output_dir
    out_dir.mkdir(parents=True, exist_ok=True)

    status = "complete"
    results: dict = {}
    files: list = []
    eigen_hash = ""
    try:
        if job_type == "single":
            files, results, library = run_single(config)
            eigen_hash = library.provenance_hash
        elif job_type in ("nu0_scan", "intensity_scan"):
            files, results, eigen_hash = run_scan(config)
        elif job_type == "thermal":
            files, results, eigen_hash = run_thermal(config)
        elif job_type == "convergence_check":
            files, results = convergence_check(config)
        elif job_type == "eigen":
            files, results, eigen_hash = run_eigen(config)
        elif job_type == "export":
            files, results, eigen_hash = run_export(config)
        else:
            raise ConfigError(f"unknown job type {job_type!r}")
    except RovibError:
        _write_manifest(config, out_dir, "incomplete", {}, [], "",
                        time.perf_counter() - t_start)
        raise

    return _write_manifest(config, out_dir, status, results, files,
                           eigen_hash, time.perf_counter() - t_start)


def _write_manifest(config, out_dir, status, results, files, eigen_hash,
                    wall_time):
    manifest = RunManifest({
        "code_version": __version__,
        "config_hash": config.config_hash(),
        "eigen_library_hash": eigen_hash,
        "job": config.section("job").get("type", "single"),
        "status": status,
        "results": results,
        "wall_time_s": wall_time,
        "files": sorted((_file_entry(f, out_dir) for f in files),
                        key=lambda e: e["path"]),
    })
    manifest.save(out_dir / "manifest.json")
    return manifest


def _scan_pulses(config: RunConfig, cp_peak=None):
    """The centrifuge at a peak plus the equal-energy matched Gaussian."""
    cp = build_pulse(config, kind="centrifuge", peak=cp_peak)
    gp = build_pulse(config, kind="matched-gaussian", peak=cp_peak)
    return [("centrifuge", cp), ("gaussian", gp)]


def _scan_task(args):
    config_raw, config_path, tag, nu0, pulse_kind, peak = args
    config = RunConfig(raw=config_raw, path=config_path)
    pulses = dict(_scan_pulses(config, cp_peak=peak))
    pulse = pulses[pulse_kind]
    out_dir = config.output_dir / "runs" / tag
    _files, summary, _lib = run_single(
        config, out_dir=out_dir, initial_state=[nu0, 0, 0], pulse=pulse)
    return tag, summary


def run_scan(config: RunConfig):
    """nu0 / intensity scans over both pulse shapes at equal energy."""
    job = config.section("job")
    nu0_list = job.get("nu0_list")
    if not nu0_list:
        raise ConfigError("scan jobs need a non-empty nu0_list")
    if job.get("type") == "intensity_scan":
        peaks = job.get("cp_peaks")
        if not peaks:
            raise ConfigError("intensity_scan needs a non-empty cp_peaks list")
    else:
        peaks = [config.section("pulse")["peak"]]

    tasks = []
    for peak in peaks:
        for kind, _pulse in _scan_pulses(config, cp_peak=peak):
            for nu0 in nu0_list:
                tag = f"{kind}_I{peak:.6g}_nu{nu0}"
                tasks.append((config.raw, config.path, tag, nu0, kind, peak))
    tasks.sort(key=lambda t: t[2])

    # warm model + library caches once before any fan-out
    model = build_model(config)
    grid = build_grid(config)
    get_library(model, grid, build_channels(config, m_override=0),
                config.cache_dir)

    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            outcomes = dict(pool.map(_scan_task, tasks))
    else:
        outcomes = dict(_scan_task(t) for t in tasks)

    rows = []
    for (config_raw, _path, tag, nu0, kind, peak) in tasks:
        s = outcomes[tag]
        rows.append((kind, peak, nu0, s["mean_rotation"], s["pdiss"],
                     s["vib_distribution"].get("1", 0.0),
                     s["vib_distribution"].get("2", 0.0), s["final_norm"]))
    files = [write_csv(config.output_dir / "scan_summary.csv",
                       ("pulse", "peak", "nu0", "mean_rotation", "pdiss",
                        "v1", "v2", "final_norm"), rows)]
    results = {"tasks": len(tasks)}
    eigen_hash = library_hash(model, grid, build_channels(config, 0))
    return files, results, eigen_hash


def run_thermal(config: RunConfig):
    """Thermal-ensemble rotational distributions at the configured pulse."""
    job = config.section("job")
    temperatures = job.get("temperatures", [0.5, 1.0, 2.0])
    n_t = int(job.get("n_t", 24))
    model = build_model(config)
    grid = build_grid(config)
    pulse = build_pulse(config)

    members = ensemble_members(ThermalSpec(temperature=1.0, n_t=n_t))
    shared = {"model": model, "grid": grid}
    dists = {}
    member_rows = []
    for (nu0, n0, m0) in members:
        tag = f"member_nu{nu0}_N{n0}_M{m0}"
        _files, summary, _lib = run_single(
            config, out_dir=config.output_dir / "runs" / tag,
            initial_state=[nu0, n0, m0], pulse=pulse, shared=shared)
        out_dir = config.output_dir / "runs" / tag
        dist = _read_distribution(out_dir / "final_rot_distribution.csv")
        dists[(nu0, n0, m0)] = dist
        member_rows.append((nu0, n0, m0, summary["mean_rotation"],
                            summary["pdiss"]))

    channels0 = build_channels(config, m_override=0)
    library0 = get_library(model, grid, channels0, config.cache_dir)
    rows = []
    weight_rows = []
    for temp in temperatures:
        spec = ThermalSpec(temperature=temp, n_t=n_t)
        averaged = thermal_average(dists, spec, library0)
        rows.extend((temp, n, w) for n, w in averaged.items())
        for member in members:
            weight_rows.append((temp, *member,
                                thermal_weight(spec, library0, member)))
    files = [
        write_csv(config.output_dir / "thermal_rotdist.csv",
                  ("T", "N", "weight"), rows),
        write_csv(config.output_dir / "thermal_weights.csv",
                  ("T", "nu0", "N0", "M", "W"), weight_rows),
        write_csv(config.output_dir / "thermal_members.csv",
                  ("nu0", "N0", "M", "mean_rotation", "pdiss"), member_rows),
    ]
    results = {"members": len(members), "temperatures": temperatures}
    return files, results, library0.provenance_hash


def _read_distribution(path):
    out = {}
    lines = Path(path).read_text().strip().splitlines()[1:]
    for line in lines:
        key, weight = line.split(",")
        out[int(key)] = float(weight)
    return out


def convergence_check(config: RunConfig):
    """Refine grid, basis and step, then compare headline observables.

    Reruns the job's representative propagation with n_points x 2,
    N_max + 20 and dt / 2; drift below 1e-3 absolute passes.
    """
    base_dir = config.output_dir / "convergence_base"
    fine_raw = json.loads(json.dumps(config.raw))
    fine_raw.setdefault("grid", {})
    grid_sec = config.section("grid")
    fine_raw["grid"]["n_points"] = grid_sec["n_points"] * 2
    fine_raw["grid"]["n_max"] = grid_sec["n_max"] + 20
    fine_raw.setdefault("propagation", {})
    fine_raw["propagation"]["dt"] = config.section("propagation")["dt"] / 2.0
    fine_raw["output_dir"] = str(config.output_dir / "convergence_fine")
    fine = RunConfig(raw=fine_raw, path=config.path)

    job = config.section("job")
    initial = job.get("initial_state", [0, 0, 0])
    if job.get("nu0_list"):
        initial = [job["nu0_list"][0], 0, 0]

    _f0, base, _l0 = run_single(config, out_dir=base_dir,
                                initial_state=initial)
    _f1, fine_summary, _l1 = run_single(fine, out_dir=fine.output_dir,
                                        initial_state=initial)

    base_vib = {int(k): v for k, v in base["vib_distribution"].items()}
    fine_vib = {int(k): v for k, v in fine_summary["vib_distribution"].items()}
    keys = set(base_vib) | set(fine_vib)
    drift_vib = max(abs(base_vib.get(k, 0.0) - fine_vib.get(k, 0.0))
                    for k in keys)
    base_rot = _read_distribution(base_dir / "final_rot_distribution.csv")
    fine_rot = _read_distribution(
        Path(fine.output_dir) / "final_rot_distribution.csv")
    rkeys = set(base_rot) | set(fine_rot)
    drift_rot = max(abs(base_rot.get(k, 0.0) - fine_rot.get(k, 0.0))
                    for k in rkeys)
    drift_pdiss = abs(base["pdiss"] - fine_summary["pdiss"])
    base_cos2 = _read_final_cos2(base_dir / "series.csv")
    fine_cos2 = _read_final_cos2(Path(fine.output_dir) / "series.csv")
    drift_cos2 = abs(base_cos2 - fine_cos2)

    report = {
        "drift_vib": drift_vib,
        "drift_rot": drift_rot,
        "drift_pdiss": drift_pdiss,
        "drift_cos2": drift_cos2,
        "max_drift": max(drift_vib, drift_rot, drift_pdiss, drift_cos2),
        "passed": max(drift_vib, drift_rot, drift_pdiss, drift_cos2) < 1.0e-3,
        "initial_state": initial,
    }
    path = config.output_dir / "convergence.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return [path], report


def _read_final_cos2(path):
    lines = Path(path).read_text().strip().splitlines()
    return float(lines[-1].split(",")[2])


def run_eigen(config: RunConfig):
    """Build (or load) the eigen library and export the level table."""
    model = build_model(config)
    grid = build_grid(config)
    channels = build_channels(config)
    library = get_library(model, grid, channels, config.cache_dir)
    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    export_levels_csv(library, out / "eigen_levels.csv")
    constants = averaged_constants(library, model)
    rows = [(nu, constants.b_nu_cm[nu], constants.delta_alpha_nu[nu],
             constants.alpha_perp_nu[nu])
            for nu in range(len(constants.b_nu_cm))]
    files = [out / "eigen_levels.csv",
             write_csv(out / "averaged_constants.csv",
                       ("nu", "B_nu_cm", "delta_alpha", "alpha_perp"), rows)]
    census = bound_census(library)
    results = {
        "bound_states": sum(library.bound_count(n)
                            for n in channels.n_list),
        "n_max_bound_0": census.get(0, -1),
        "b0_cm": float(constants.b_nu_cm[0]),
    }
    return files, results, library.provenance_hash


def run_export(config: RunConfig):
    """Pulse profile and spectrum tables for the figure kit."""
    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    pulse = build_pulse(config)
    t = np.linspace(0.0, pulse.duration, 4096)
    files = [write_csv(out / "pulse.csv", ("t", "intensity"),
                       list(zip(t, pulse.intensity(t))))]
    freq, power, rms = spectrum(pulse)
    keep = power > power.max() * 1.0e-12
    files.append(write_csv(out / "pulse_spectrum.csv", ("freq", "power"),
                           list(zip(freq[keep], power[keep]))))
    results = {"fluence": fluence(pulse), "rms_bandwidth": rms,
               "pulse": pulse.describe()}
    return files, results, ""
