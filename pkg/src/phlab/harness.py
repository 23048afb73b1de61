"""Experiment harness: configuration files, deterministic orchestration,
run manifests with content digests, reproduction checks, and plot-data export.

Config files are UTF-8 key/value text with two sections::

    [system]
    type = skew              ; skew | cylinder
    fiber = morse_smale      ; identity | rotation | morse_smale | coupled
    a = 0.5
    s = 2

    [experiment]
    kind = census            ; census | lyapunov | ustate | holonomy | loop |
                             ; cylinder | atomicity | recurrence | stability |
                             ; leafspace
    seed = 1234
    n = 100000

Unknown keys are rejected.  Environment overrides: PHLAB_OUT (output
directory) and PHLAB_WORKERS (worker count) only.  Exit codes: 0 success,
2 configuration error, 3 numeric failure (partial outputs kept, flagged).
"""

import argparse
import configparser
import hashlib
import io
import json
import os
import sys as _sys
import tempfile
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from .circle import mod1
from .phase_maps import (BasePoint, PhasePoint, NonConvergenceError,
                         ValidationError, make_anosov_base,
                         make_cylinder, make_system, identity_fiber,
                         rotation_fiber, morse_smale_fiber, coupled_fiber)
from .ergodic_stats import uniform_sampler, ensemble_stats
from .ustates import (CsBlock, block_recurrence, cesaro_ustate,
                      classify_regime, make_udisk, physical_measure_census,
                      stability_sweep, unstable_density_ratio)
from .foliation_lab import (atomicity_test, cylinder_center_holonomy,
                            cylinder_conjugacy_residual,
                            cylinder_jacobian_drift,
                            holonomy_singularity_report, stable_holonomy,
                            su_loop_holonomy, unstable_holonomy)
from .leafspace import attractor_report, periodic_base_points
from .parallel import derive_rng

GOLDEN = float((np.sqrt(5.0) - 1.0) / 2.0)


class ConfigError(ValueError):
    """Invalid configuration; maps to exit code 2."""


# ---------------------------------------------------------------------------
# configuration schema


def _float(s):
    return float(s)


def _int(s):
    return int(s)


def _str(s):
    return str(s)


def _ints(s):
    return tuple(int(p) for p in str(s).split())


SYSTEM_SCHEMA = {
    "type": (_str, "skew"),
    "base": (_str, "2 1 1 1"),
    "fiber": (_str, "identity"),
    "a": (_float, 0.5),
    "s": (_int, 2),
    "omega": (_float, GOLDEN),
    "b": (_float, 0.2),
    "base_coupling": (_float, 0.0),
    "label": (_str, ""),
    # cylinder parameters
    "c": (_float, 0.2),
    "eps": (_float, 0.0),
    "degree": (_int, 2),
}

COMMON_PARAMS = {"seed": (_int, 0)}

PARAM_SCHEMAS = {
    "census": {"n": (_int, 100_000), "burn_in": (_int, 1000),
               "grid": (_ints, (20, 20, 20)), "merge_tol": (_float, 0.05),
               "rep_orbits": (_int, 64), "rep_steps": (_int, 20_000),
               "zero_tol": (_float, 1e-3)},
    "lyapunov": {"n_orbits": (_int, 1000), "n_steps": (_int, 10_000),
                 "burn_in": (_int, 0)},
    "ustate": {"n": (_int, 1000), "grid": (_ints, (64, 64, 16)),
               "disk_length": (_float, 0.01), "disk_samples": (_int, 100_000),
               "disk_u": (_float, 0.2), "disk_v": (_float, 0.6),
               "disk_theta": (_float, 0.3), "ratio_n": (_int, 12)},
    "holonomy": {"direction": (_str, "stable"), "x_u": (_float, 0.0),
                 "x_v": (_float, 0.0), "offset": (_float, 0.01),
                 "grid_size": (_int, 1024), "tol": (_float, 1e-9),
                 "n_max": (_int, 200), "entropy_bins": (_int, 512)},
    "loop": {"x_u": (_float, 0.0), "x_v": (_float, 0.0), "leg": (_float, 0.1),
             "grid_size": (_int, 1024), "tol": (_float, 1e-9),
             "n_max": (_int, 200)},
    "cylinder": {"grid_size": (_int, 1024), "depth": (_int, 64),
                 "entropy_bins": (_int, 512), "k_max": (_int, 30)},
    "atomicity": {"x_u": (_float, 0.1), "x_v": (_float, 0.3),
                  "n": (_int, 100), "m_samples": (_int, 256),
                  "cluster_radius": (_float, 1e-6)},
    "recurrence": {"horizon": (_int, 200), "block_u": (_float, 0.0),
                   "block_v": (_float, 0.0), "block_side": (_float, 0.2),
                   "theta_center": (_float, 0.5),
                   "theta_halfwidth": (_float, 0.1),
                   "hit_threshold": (_float, 0.01),
                   "disk_length": (_float, 0.01),
                   "disk_samples": (_int, 10_000),
                   "disk_theta": (_float, 0.3)},
    "stability": {"a0": (_float, 0.3), "a1": (_float, 0.7),
                  "steps": (_int, 9), "s": (_int, 2),
                  "grid": (_ints, (10, 10, 10)), "n": (_int, 20_000),
                  "burn_in": (_int, 1000), "merge_tol": (_float, 0.05)},
    "leafspace": {"max_period": (_int, 3), "orbit_length": (_int, 1_000_000),
                  "grid_m": (_int, 16)},
}


@dataclass
class ExperimentConfig:
    kind: str
    seed: int
    system: dict
    params: dict

    def to_dict(self):
        return {"kind": self.kind, "seed": self.seed,
                "system": dict(self.system), "params": dict(self.params)}

    @classmethod
    def from_dict(cls, d):
        return validate_config(d["system"], d["kind"], d["seed"], d["params"])

    def to_ini(self):
        cp = configparser.ConfigParser()
        cp["system"] = {k: _fmt(v) for k, v in self.system.items()}
        exp = {"kind": self.kind, "seed": str(self.seed)}
        exp.update({k: _fmt(v) for k, v in self.params.items()})
        cp["experiment"] = exp
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()


def _fmt(v):
    if isinstance(v, tuple):
        return " ".join(str(x) for x in v)
    return repr(float(v)) if isinstance(v, float) else str(v)


def validate_config(system, kind, seed, params) -> ExperimentConfig:
    if kind not in PARAM_SCHEMAS:
        raise ConfigError(f"unknown experiment kind {kind!r}")
    sysd = {}
    for key, raw in dict(system).items():
        if key not in SYSTEM_SCHEMA:
            raise ConfigError(f"unknown [system] key {key!r}")
        parser, _ = SYSTEM_SCHEMA[key]
        try:
            sysd[key] = parser(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for [system] {key}: {exc}") from exc
    for key, (parser, default) in SYSTEM_SCHEMA.items():
        sysd.setdefault(key, default)
    schema = PARAM_SCHEMAS[kind]
    pd = {}
    for key, raw in dict(params).items():
        if key not in schema:
            raise ConfigError(f"unknown [experiment] key {key!r} for kind {kind}")
        parser, _ = schema[key]
        try:
            pd[key] = parser(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {exc}") from exc
    for key, (parser, default) in schema.items():
        pd.setdefault(key, default)
    _range_checks(kind, pd)
    return ExperimentConfig(kind=kind, seed=int(seed), system=sysd, params=pd)


def _range_checks(kind, pd):
    for key in ("n", "n_steps", "n_orbits", "horizon", "steps", "m_samples",
                "grid_size", "depth", "entropy_bins", "rep_orbits"):
        if key in pd and pd[key] <= 0 and not (key == "horizon"):
            raise ConfigError(f"{key} must be positive")
    if "grid" in pd and any(g <= 0 for g in pd["grid"]):
        raise ConfigError("grid dimensions must be positive")
    if "merge_tol" in pd and pd["merge_tol"] <= 0:
        raise ConfigError("merge_tol must be positive")
    if "tol" in pd and pd["tol"] <= 0:
        raise ConfigError("tol must be positive")
    if kind == "holonomy" and pd["direction"] not in ("stable", "unstable"):
        raise ConfigError("holonomy direction must be stable or unstable")


def parse_config_file(path) -> ExperimentConfig:
    cp = configparser.ConfigParser()
    try:
        with open(path, "r", encoding="utf-8") as f:
            cp.read_file(f)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for section in cp.sections():
        if section not in ("system", "experiment"):
            raise ConfigError(f"unknown section [{section}]")
    if "experiment" not in cp:
        raise ConfigError("missing [experiment] section")
    exp = dict(cp["experiment"])
    kind = exp.pop("kind", None)
    if kind is None:
        raise ConfigError("missing experiment kind")
    seed = exp.pop("seed", "0")
    try:
        seed = int(seed)
    except ValueError as exc:
        raise ConfigError("seed must be an integer") from exc
    system = dict(cp["system"]) if "system" in cp else {}
    return validate_config(system, kind, seed, exp)


def build_system(sysd):
    """Instantiate the catalog system described by a [system] dict."""
    if sysd["type"] == "cylinder":
        try:
            return make_cylinder(sysd["c"], sysd["eps"], sysd["degree"])
        except ValidationError as exc:
            raise ConfigError(str(exc)) from exc
    if sysd["type"] != "skew":
        raise ConfigError(f"unknown system type {sysd['type']!r}")
    nums = _ints(sysd["base"]) if isinstance(sysd["base"], str) else sysd["base"]
    if len(nums) != 4:
        raise ConfigError("base matrix needs 4 integers (row major)")
    try:
        base = make_anosov_base([[nums[0], nums[1]], [nums[2], nums[3]]])
        fk = sysd["fiber"]
        if fk == "identity":
            fiber = identity_fiber()
        elif fk == "rotation":
            fiber = rotation_fiber(sysd["omega"])
        elif fk == "morse_smale":
            fiber = morse_smale_fiber(sysd["a"], sysd["s"])
        elif fk == "coupled":
            fiber = coupled_fiber(sysd["a"], sysd["b"])
        else:
            raise ConfigError(f"unknown fiber kind {fk!r}")
        return make_system(base, fiber, base_coupling=sysd["base_coupling"],
                           label=sysd["label"] or fk)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# serialization helpers


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(_jsonable(obj), f, sort_keys=True, indent=2)
        f.write("\n")


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(repr(x) if isinstance(x, float) else str(x)
                             for x in row) + "\n")


def _write_measure_csv(path, measure):
    with open(path, "w", encoding="utf-8") as f:
        f.write("# dims," + ",".join(str(d) for d in measure.dims) + "\n")
        f.write("weight\n")
        for w in measure.weights.ravel():
            f.write(repr(float(w)) + "\n")


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


# ---------------------------------------------------------------------------
# experiment implementations (each returns (file names, summary dict))


def _exp_census(cfg, out, workers):
    sys_ = build_system(cfg.system)
    p = cfg.params
    census = physical_measure_census(
        sys_, p["grid"], n=p["n"], burn_in=p["burn_in"],
        merge_tol=p["merge_tol"], seed=cfg.seed, workers=workers,
        rep_orbits=p["rep_orbits"], rep_steps=p["rep_steps"])
    regime = classify_regime(census, zero_tol=p["zero_tol"]) \
        if census.clusters else None
    files = []
    cj = {"cluster_count": census.cluster_count,
          "unassigned_fraction": census.unassigned_fraction,
          "observables": census.observable_names,
          "regime": regime.kind if regime else "none",
          "clusters": [{
              "centroid": c.centroid, "count": c.count,
              "basin_fraction": c.basin_fraction,
              "exponent_mean": c.exponent.mean,
              "exponent_std_error": c.exponent.std_error,
          } for c in census.clusters]}
    _write_json(os.path.join(out, "census.json"), cj)
    files.append("census.json")
    rows = [(i, pt[0], pt[1], pt[2], int(census.assignments[i]))
            for i, pt in enumerate(census.initial_points)]
    _write_csv(os.path.join(out, "assignments.csv"),
               ["orbit", "u0", "v0", "theta0", "cluster"], rows)
    files.append("assignments.csv")
    for k, c in enumerate(census.clusters):
        name = f"measure_cluster{k}.csv"
        _write_measure_csv(os.path.join(out, name), c.measure)
        files.append(name)
    summary = {"cluster_count": census.cluster_count,
               "regime": regime.kind if regime else "none",
               "basin_fractions": [c.basin_fraction for c in census.clusters],
               "exponents": [c.exponent.mean for c in census.clusters]}
    return files, summary


def _exp_lyapunov(cfg, out, workers):
    sys_ = build_system(cfg.system)
    p = cfg.params
    rng = derive_rng(cfg.seed, "lyapunov")
    u0, v0, t0 = uniform_sampler(rng, p["n_orbits"])
    res = ensemble_stats(sys_, u0, v0, t0, p["n_steps"],
                         burn_in=p["burn_in"], workers=workers)
    lyap = res["lyap"]
    est = {"mean": float(lyap.mean()),
           "std_error": float(lyap.std(ddof=1) / np.sqrt(len(lyap))),
           "n_orbits": p["n_orbits"], "n_steps": p["n_steps"]}
    _write_csv(os.path.join(out, "exponents.csv"), ["orbit", "exponent"],
               [(i, float(x)) for i, x in enumerate(lyap)])
    _write_json(os.path.join(out, "lyapunov.json"), est)
    return ["exponents.csv", "lyapunov.json"], est


def _exp_ustate(cfg, out, workers):
    sys_ = build_system(cfg.system)
    p = cfg.params
    disk = make_udisk(sys_, PhasePoint.of(p["disk_u"], p["disk_v"],
                                          p["disk_theta"]),
                      length=p["disk_length"], n_samples=p["disk_samples"])
    measure = cesaro_ustate(sys_, disk, p["n"], p["grid"], seed=cfg.seed,
                            workers=workers)
    base = measure.base_marginal()
    tv = 0.5 * float(np.abs(base - 1.0 / base.size).sum())
    ratio = unstable_density_ratio(sys_, disk, p["ratio_n"])
    _write_measure_csv(os.path.join(out, "measure.csv"), measure)
    summary = {"tv_to_uniform_base": tv, "density_ratio": ratio,
               "n": p["n"], "dims": list(p["grid"])}
    _write_json(os.path.join(out, "ustate.json"), summary)
    return ["measure.csv", "ustate.json"], summary


def _exp_holonomy(cfg, out, workers):
    sys_ = build_system(cfg.system)
    p = cfg.params
    x = BasePoint(p["x_u"], p["x_v"])
    if p["direction"] == "stable":
        vec = sys_.base.e_s
        fn = stable_holonomy
    else:
        vec = sys_.base.e_u
        fn = unstable_holonomy
    y = BasePoint(*(mod1(np.array([x.u, x.v]) + p["offset"] * vec)))
    h = fn(sys_, x, y, grid_size=p["grid_size"], tol=p["tol"],
           n_max=p["n_max"])
    rep = holonomy_singularity_report(h, p["entropy_bins"])
    _write_csv(os.path.join(out, "holonomy.csv"), ["theta", "image"],
               list(zip(map(float, h.grid), map(float, h.samples))))
    summary = {"n_used": h.n_used, "cauchy_gap": h.cauchy_gap,
               "source": list(h.source), "target": list(h.target),
               "monotone": h.is_monotone(),
               "normalized_entropy": rep.normalized_entropy,
               "jacobian_min": rep.jacobian_min,
               "jacobian_max": rep.jacobian_max}
    _write_json(os.path.join(out, "holonomy.json"), summary)
    return ["holonomy.csv", "holonomy.json"], summary


def _exp_loop(cfg, out, workers):
    sys_ = build_system(cfg.system)
    p = cfg.params
    res = su_loop_holonomy(sys_, BasePoint(p["x_u"], p["x_v"]), p["leg"],
                           grid_size=p["grid_size"], tol=p["tol"],
                           n_max=p["n_max"])
    _write_csv(os.path.join(out, "loop.csv"), ["theta", "image"],
               list(zip(map(float, res.holonomy.grid),
                        map(float, res.holonomy.samples))))
    summary = {"displacement": res.displacement, "leg": p["leg"],
               "legs_n_used": [h.n_used for h in res.legs]}
    _write_json(os.path.join(out, "loop.json"), summary)
    return ["loop.csv", "loop.json"], summary


def _exp_cylinder(cfg, out, workers):
    sysd = dict(cfg.system)
    sysd["type"] = "cylinder"
    cyl = build_system(sysd)
    p = cfg.params
    h = cylinder_center_holonomy(cyl, B=p["grid_size"], n=p["depth"])
    rep = holonomy_singularity_report(h, p["entropy_bins"])
    residual = cylinder_conjugacy_residual(cyl, h)
    slope, ks, r = cylinder_jacobian_drift(cyl, h, k_max=p["k_max"])
    expected = -np.log((cyl.base_degree + 2 * np.pi * cyl.eps)
                       / cyl.base_degree)
    _write_csv(os.path.join(out, "conjugacy.csv"), ["x", "h"],
               list(zip(map(float, h.grid), map(float, h.samples))))
    _write_csv(os.path.join(out, "jacobian_drift.csv"), ["depth", "log_ratio"],
               list(zip(map(int, ks), map(float, r))))
    summary = {"residual": residual,
               "normalized_entropy": rep.normalized_entropy,
               "drift_slope": slope, "expected_slope": float(expected),
               "cauchy_gap": h.cauchy_gap, "depth": p["depth"]}
    _write_json(os.path.join(out, "cylinder.json"), summary)
    return ["conjugacy.csv", "jacobian_drift.csv", "cylinder.json"], summary


def _exp_atomicity(cfg, out, workers):
    sys_ = build_system(cfg.system)
    p = cfg.params
    res = atomicity_test(sys_, BasePoint(p["x_u"], p["x_v"]), p["n"],
                         m_samples=p["m_samples"],
                         cluster_radius=p["cluster_radius"])
    _write_csv(os.path.join(out, "extents.csv"), ["step", "extent"],
               [(i, float(x)) for i, x in enumerate(res.extents)])
    summary = {"cluster_count": res.cluster_count,
               "max_cluster_diameter": res.max_cluster_diameter,
               "decay_rate": res.decay_rate,
               "diameter_drift": res.diameter_drift}
    _write_json(os.path.join(out, "atomicity.json"), summary)
    return ["extents.csv", "atomicity.json"], summary


def _exp_recurrence(cfg, out, workers):
    sys_ = build_system(cfg.system)
    p = cfg.params
    disk = make_udisk(sys_, PhasePoint.of(0.31, 0.17, p["disk_theta"]),
                      length=p["disk_length"], n_samples=p["disk_samples"])
    half = p["block_side"] / 2.0
    block = CsBlock(u_interval=(p["block_u"] - half, p["block_u"] + half),
                    v_interval=(p["block_v"] - half, p["block_v"] + half),
                    theta_interval=(p["theta_center"] - p["theta_halfwidth"],
                                    p["theta_center"] + p["theta_halfwidth"]))
    res = block_recurrence(sys_, disk, block, p["horizon"], seed=cfg.seed,
                           hit_threshold=p["hit_threshold"], workers=workers)
    _write_csv(os.path.join(out, "recurrence.csv"), ["time", "fraction"],
               list(zip(map(int, res.times), map(float, res.fractions))))
    summary = {"hit_count": res.hit_count,
               "hit_threshold": res.hit_threshold,
               "horizon": p["horizon"]}
    _write_json(os.path.join(out, "recurrence.json"), summary)
    return ["recurrence.csv", "recurrence.json"], summary


def _exp_stability(cfg, out, workers):
    base = build_system(cfg.system).base
    p = cfg.params

    def family(a):
        return make_system(base, morse_smale_fiber(a, p["s"]))

    res = stability_sweep(family, p["a0"], p["a1"], p["steps"],
                          dims=p["grid"], n=p["n"], burn_in=p["burn_in"],
                          merge_tol=p["merge_tol"], seed=cfg.seed,
                          workers=workers)
    rows = []
    for r in res.rows:
        for ci, cen in enumerate(r.centroids):
            for di, val in enumerate(cen):
                rows.append((r.a, r.cluster_count, ci, di, float(val)))
    _write_csv(os.path.join(out, "stability.csv"),
               ["a", "cluster_count", "cluster", "dim", "value"], rows)
    summary = {"counts": [r.cluster_count for r in res.rows],
               "max_adjacent_displacement": res.max_adjacent_displacement,
               "spacing": res.spacing}
    _write_json(os.path.join(out, "stability.json"), summary)
    return ["stability.csv", "stability.json"], summary


def _exp_leafspace(cfg, out, workers):
    base = build_system(cfg.system).base
    p = cfg.params
    rows = []
    counts = {}
    for n in range(1, p["max_period"] + 1):
        pts = periodic_base_points(base, n)
        counts[str(n)] = len(pts)
        rows.extend((n, pt.u, pt.v) for pt in pts)
    _write_csv(os.path.join(out, "periodic_points.csv"), ["n", "u", "v"], rows)
    rep = attractor_report(base, orbit_length=p["orbit_length"],
                           grid_m=p["grid_m"], seed=cfg.seed)
    summary = {"periodic_counts": counts,
               "attractor_count": rep.attractor_count,
               "cells_visited": rep.cells_visited,
               "total_cells": rep.total_cells,
               "max_relative_deviation": rep.max_relative_deviation}
    _write_json(os.path.join(out, "leafspace.json"), summary)
    return ["periodic_points.csv", "leafspace.json"], summary


_EXPERIMENTS = {
    "census": _exp_census,
    "lyapunov": _exp_lyapunov,
    "ustate": _exp_ustate,
    "holonomy": _exp_holonomy,
    "loop": _exp_loop,
    "cylinder": _exp_cylinder,
    "atomicity": _exp_atomicity,
    "recurrence": _exp_recurrence,
    "stability": _exp_stability,
    "leafspace": _exp_leafspace,
}


# ---------------------------------------------------------------------------
# run / manifest / reproduce


@dataclass
class RunManifest:
    config: dict
    version: str
    status: str                 # "ok" | "failed"
    exit_code: int
    wall_time: float
    files: list                 # [{"name": ..., "sha256": ...}]
    summary: dict
    error: str = ""

    def to_dict(self):
        return {"config": self.config, "version": self.version,
                "status": self.status, "exit_code": self.exit_code,
                "wall_time": self.wall_time, "files": self.files,
                "summary": self.summary, "error": self.error}


def run(config: ExperimentConfig, out_dir, workers=1) -> RunManifest:
    """Execute one experiment, writing outputs plus a manifest.json."""
    os.makedirs(out_dir, exist_ok=True)
    start = time.monotonic()
    status, exit_code, error, summary, names = "ok", 0, "", {}, []
    try:
        names, summary = _EXPERIMENTS[config.kind](config, out_dir, workers)
    except (NonConvergenceError, FloatingPointError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        status, exit_code, error = "failed", 3, str(exc)
    wall = time.monotonic() - start
    files = [{"name": n, "sha256": _sha256(os.path.join(out_dir, n))}
             for n in sorted(names)]
    manifest = RunManifest(config=config.to_dict(), version=__version__,
                           status=status, exit_code=exit_code,
                           wall_time=wall, files=files, summary=summary,
                           error=error)
    _write_json(os.path.join(out_dir, "manifest.json"), manifest.to_dict())
    return manifest


@dataclass
class ReproduceReport:
    identical: bool
    divergent: list
    missing: list
    status_matches: bool


def reproduce(manifest_path, workers=1) -> ReproduceReport:
    """Re-run a manifest's experiment and diff the output digests."""
    try:
        with open(manifest_path, "r", encoding="utf-8") as f:
            man = json.load(f)
    except OSError as exc:
        raise ConfigError(f"cannot read manifest: {exc}") from exc
    if "config" not in man:
        raise ConfigError("manifest missing config snapshot")
    cfg = ExperimentConfig.from_dict(man["config"])
    tmp = tempfile.mkdtemp(prefix="phlab-repro-")
    new_man = run(cfg, tmp, workers=workers)
    old_files = {f["name"]: f["sha256"] for f in man["files"]}
    new_files = {f["name"]: f["sha256"] for f in new_man.files}
    divergent = [n for n in old_files
                 if n in new_files and old_files[n] != new_files[n]]
    missing = [n for n in old_files if n not in new_files]
    return ReproduceReport(
        identical=not divergent and not missing,
        divergent=divergent, missing=missing,
        status_matches=(man.get("status") == new_man.status
                        and man.get("exit_code") == new_man.exit_code))


# ---------------------------------------------------------------------------
# plot data


def _read_csv(path):
    with open(path, "r", encoding="utf-8") as f:
        lines = [ln.strip() for ln in f if ln.strip()
                 and not ln.startswith("#")]
    header = lines[0].split(",")
    rows = [ln.split(",") for ln in lines[1:]]
    return header, rows


def emit_plotdata(run_dir, kind):
    """Reshape run outputs into tidy (series, x, y) CSV files."""
    out = os.path.join(run_dir, f"plot_{kind}.csv")
    rows = []
    if kind == "theta_marginal":
        src = None
        for cand in ("measure_cluster0.csv", "measure.csv"):
            path = os.path.join(run_dir, cand)
            if os.path.exists(path):
                src = path
                break
        if src is None:
            raise ConfigError("no measure file found for theta_marginal")
        with open(src, "r", encoding="utf-8") as f:
            dims = tuple(int(x) for x in
                         f.readline().strip().split(",")[1:])
            f.readline()
            w = np.array([float(ln) for ln in f if ln.strip()])
        marg = w.reshape(dims).sum(axis=(0, 1))
        rows = [("theta_marginal", float((i + 0.5) / len(marg)), float(m))
                for i, m in enumerate(marg)]
    elif kind == "holonomy_graph":
        src = None
        for cand in ("holonomy.csv", "loop.csv", "conjugacy.csv"):
            path = os.path.join(run_dir, cand)
            if os.path.exists(path):
                src = path
                break
        if src is None:
            raise ConfigError("no holonomy file found")
        _, data = _read_csv(src)
        rows = [("holonomy", float(a), float(b)) for a, b in data]
    elif kind == "exponent_histogram":
        path = os.path.join(run_dir, "exponents.csv")
        if not os.path.exists(path):
            raise ConfigError("no exponents.csv found")
        _, data = _read_csv(path)
        vals = np.array([float(r[1]) for r in data])
        hist, edges = np.histogram(vals, bins=50)
        rows = [("exponent_histogram",
                 float((edges[i] + edges[i + 1]) / 2), int(h))
                for i, h in enumerate(hist)]
    elif kind == "recurrence_series":
        path = os.path.join(run_dir, "recurrence.csv")
        if not os.path.exists(path):
            raise ConfigError("no recurrence.csv found")
        _, data = _read_csv(path)
        rows = [("recurrence", float(a), float(b)) for a, b in data]
    else:
        raise ConfigError(f"unknown plotdata kind {kind!r}")
    _write_csv(out, ["series", "x", "y"], rows)
    return out


# ---------------------------------------------------------------------------
# CLI


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="phlab",
        description="Skew-product partially hyperbolic dynamics laboratory")
    sub = parser.add_subparsers(dest="cmd", required=True)
    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--workers", type=int, default=None)
    p_rep = sub.add_parser("reproduce", help="re-run and diff a manifest")
    p_rep.add_argument("manifest")
    p_rep.add_argument("--workers", type=int, default=None)
    p_plot = sub.add_parser("plotdata", help="emit plot-ready CSV")
    p_plot.add_argument("run_dir")
    p_plot.add_argument("--kind", required=True)
    args = parser.parse_args(argv)

    workers = args.workers if getattr(args, "workers", None) else None
    if workers is None:
        workers = int(os.environ.get("PHLAB_WORKERS", "1"))
    try:
        if args.cmd == "run":
            cfg = parse_config_file(args.config)
            if args.seed is not None:
                cfg = ExperimentConfig(kind=cfg.kind, seed=args.seed,
                                       system=cfg.system, params=cfg.params)
            out = args.out or os.environ.get("PHLAB_OUT") or "phlab-run"
            manifest = run(cfg, out, workers=workers)
            print(f"{manifest.status}: {cfg.kind} -> {out} "
                  f"({len(manifest.files)} files)")
            if manifest.status == "failed":
                print(f"error: {manifest.error}", file=_sys.stderr)
                return 3
            return 0
        if args.cmd == "reproduce":
            rep = reproduce(args.manifest, workers=workers)
            if rep.identical:
                print("all output digests identical")
                return 0
            print(f"divergent: {rep.divergent} missing: {rep.missing}")
            return 1
        out = emit_plotdata(args.run_dir, args.kind)
        print(f"wrote {out}")
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=_sys.stderr)
        return 2
    except NonConvergenceError as exc:
        print(f"numeric failure: {exc}", file=_sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
