"""Configuration, experiment orchestration, persistence and plot-data export.

Config files are UTF-8 ``[section]`` / ``key = value`` text (a flat TOML-like
subset, no includes): ``#`` starts a comment, values are numbers, booleans,
bare strings, or comma-separated number lists.  Unknown sections or keys are
rejected with line numbers.  The effective configuration (defaults filled) is
canonicalized and hashed so every result file records exactly what produced
it.

One binary, one subcommand per experiment kind::

    specklesim <kind> --config cfg.txt [--seed N] [--threads N] [--out DIR]

kinds: simulate, moments, gaussianity, memory-tilt, memory-chroma,
jump-check, validate.  Exit codes: 0 success, 2 validation failure,
3 numerical-guard trip.  Data files are written atomically (temp file +
rename); wall-clock time lives only in the run record, never in data files.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import jump_process, memory_effects, statistics
from .core import ScalingRegime, SourceSpec, build_grid
from .covariance import CovarianceModel, validate_model
from .simulator import EnsembleSpec, dz_bound, init_source, propagate_ensemble

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ResultRecord",
    "parse_config",
    "emit_config",
    "run",
    "export_plotdata",
    "main",
]

KINDS = (
    "simulate",
    "moments",
    "gaussianity",
    "memory-tilt",
    "memory-chroma",
    "jump-check",
    "validate",
)

# section -> key -> (type, default); types: float, int, str, bool, floats
SCHEMA = {
    "regime": {
        "epsilon": ("float", 0.01),
        "eta": ("float", 0.25),
        "omega0": ("float", 1.0),
        "k0": ("floats", (0.0,)),
        "z0": ("float", 1.0),
        "d": ("int", 1),
    },
    "grid": {"n": ("int", 256), "length": ("float", 64.0)},
    "medium": {"family": ("str", "gaussian"), "r0": ("float", 1.0), "ell": ("float", 1.0)},
    "source": {
        "profile": ("str", "plane_wave"),
        "width": ("float", 1.0),
        "tilt": ("floats", (0.0,)),
    },
    "solver": {"dz": ("float", 5e-4), "dz_ode": ("float", 1e-3)},
    "ensemble": {"n_realizations": ("int", 200), "seed": ("int", 1), "batch": ("int", 100)},
    "experiment": {"kind": ("str", "")},
    "output": {"path": ("str", "results"), "format": ("str", "csv")},
    "moments": {"tau_values": ("floats", (0.0, 1.0, 2.0, 3.0))},
    "gaussianity": {"x2": ("float", 1.25)},
    "tilt": {"tau": ("float", 0.4), "mc": ("bool", False), "mc_tau": ("float", 2.5), "n_side": ("int", 2)},
    "chroma": {"omega_offset": ("float", 1.0), "h_max": ("float", 0.0), "n_h": ("int", 41)},
    "jump": {
        "etas": ("floats", (0.5, 0.25, 0.125)),
        "n_paths": ("int", 20000),
        "z": ("float", 1.0),
        "gamma0": ("float", 0.5),
        "omega_offset": ("float", 0.5),
        "zeta": ("floats", (0.3,)),
        "xi0": ("floats", (0.2,)),
        "rho_eta": ("float", 0.1),
        "rho_paths": ("int", 8000),
    },
}


class ConfigError(Exception):
    """Carries a list of (line_number, message) validation errors."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(f"line {ln}: {msg}" for ln, msg in self.errors))


class GuardError(Exception):
    """A numerical guard tripped during computation (exit code 3)."""


def _coerce(kind, raw):
    if kind == "float":
        return float(raw)
    if kind == "int":
        v = float(raw)
        if v != int(v):
            raise ValueError(f"{raw!r} is not an integer")
        return int(v)
    if kind == "bool":
        low = raw.strip().lower()
        if low in ("true", "yes", "1"):
            return True
        if low in ("false", "no", "0"):
            return False
        raise ValueError(f"{raw!r} is not a boolean")
    if kind == "floats":
        return tuple(float(p) for p in raw.split(",") if p.strip() != "")
    return raw.strip()


@dataclass
class ExperimentConfig:
    """Typed configuration with every default filled in."""

    values: dict
    kind: str = ""

    def get(self, section, key):
        return self.values[section][key]

    def build_regime(self):
        v = self.values["regime"]
        return ScalingRegime(
            epsilon=v["epsilon"], eta=v["eta"], omega0=v["omega0"],
            k0=v["k0"], z0=v["z0"], d=v["d"],
        )

    def build_grid(self):
        return build_grid(self.values["grid"]["n"], self.values["grid"]["length"])

    def build_model(self):
        v = self.values["medium"]
        return CovarianceModel(r0=v["r0"], ell=v["ell"], d=self.values["regime"]["d"], family=v["family"])

    def build_source(self):
        v = self.values["source"]
        return SourceSpec(profile=v["profile"], width=v["width"], tilt=v["tilt"])

    def build_ensemble(self):
        v = self.values["ensemble"]
        return EnsembleSpec(n_realizations=v["n_realizations"], seed=v["seed"], batch_size=v["batch"])

    def config_hash(self):
        return hashlib.sha256(emit_config(self).encode()).hexdigest()[:12]


def parse_config(text, kind=None):
    """Parse and validate config text; raises ConfigError on any problem."""
    errors = []
    values = {s: {k: d for k, (_, d) in keys.items()} for s, keys in SCHEMA.items()}
    lines_of = {}
    section = None
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in SCHEMA:
                errors.append((ln, f"unknown section [{section}]"))
                section = None
            continue
        if "=" not in line:
            errors.append((ln, f"expected key = value, got {line!r}"))
            continue
        key, _, raw_val = line.partition("=")
        key = key.strip()
        if section is None:
            errors.append((ln, f"key {key!r} outside any section"))
            continue
        if key not in SCHEMA[section]:
            errors.append((ln, f"unknown key {key!r} in section [{section}]"))
            continue
        tname = SCHEMA[section][key][0]
        try:
            values[section][key] = _coerce(tname, raw_val.strip())
            lines_of[(section, key)] = ln
        except ValueError as exc:
            errors.append((ln, f"{key}: {exc}"))
    if errors:
        raise ConfigError(errors)

    cfg_kind = values["experiment"]["kind"] or (kind or "simulate")
    if kind and values["experiment"]["kind"] and values["experiment"]["kind"] != kind:
        errors.append(
            (
                lines_of.get(("experiment", "kind"), 0),
                f"config kind {values['experiment']['kind']!r} conflicts with subcommand {kind!r}",
            )
        )
    if cfg_kind not in KINDS:
        errors.append((lines_of.get(("experiment", "kind"), 0), f"unknown experiment kind {cfg_kind!r}"))
    values["experiment"]["kind"] = cfg_kind
    cfg = ExperimentConfig(values=values, kind=cfg_kind)

    # module preconditions, before any compute
    def _line(section, key):
        return lines_of.get((section, key), 0)

    try:
        regime = cfg.build_regime()
    except ValueError as exc:
        errors.append((_line("regime", "epsilon"), str(exc)))
        regime = None
    try:
        grid = cfg.build_grid()
    except ValueError as exc:
        errors.append((_line("grid", "n"), str(exc)))
        grid = None
    try:
        model = cfg.build_model()
    except ValueError as exc:
        errors.append((_line("medium", "family"), str(exc)))
        model = None
    try:
        cfg.build_source()
    except ValueError as exc:
        errors.append((_line("source", "profile"), str(exc)))
    try:
        cfg.build_ensemble()
    except ValueError as exc:
        errors.append((_line("ensemble", "n_realizations"), str(exc)))
    if cfg.values["output"]["format"] not in ("csv", "ndjson"):
        errors.append((_line("output", "format"), "format must be csv or ndjson"))
    if regime is not None and grid is not None and model is not None:
        bound = dz_bound(regime, grid, model)
        if cfg.values["solver"]["dz"] > bound * (1 + 1e-12):
            errors.append(
                (_line("solver", "dz"), f"dz exceeds the admissible step {bound:.4g}")
            )
    if errors:
        raise ConfigError(errors)
    return cfg


def emit_config(cfg):
    """Canonical text for hashing; parse(emit(cfg)) round-trips exactly."""
    out = []
    for section in sorted(SCHEMA):
        out.append(f"[{section}]")
        for key in sorted(SCHEMA[section]):
            v = cfg.values[section][key]
            if isinstance(v, tuple):
                rendered = ", ".join(repr(float(c)) for c in v)
            elif isinstance(v, bool):
                rendered = "true" if v else "false"
            elif isinstance(v, float):
                rendered = repr(v)
            else:
                rendered = str(v)
            out.append(f"{key} = {rendered}")
        out.append("")
    return "\n".join(out)


@dataclass
class ResultRecord:
    """One experiment run: data rows plus reproducibility metadata."""

    experiment: str
    config_hash: str
    seed: int
    schema: tuple
    rows: list
    wall_clock_s: float
    meta: dict = field(default_factory=dict)
    paths: list = field(default_factory=list)


def _atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp_", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt_cell(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _rows_to_csv(schema, rows):
    lines = [",".join(schema)]
    for row in rows:
        lines.append(",".join(_fmt_cell(row.get(col, "")) for col in schema))
    return "\n".join(lines) + "\n"


def _rows_to_ndjson(schema, rows):
    lines = [json.dumps({col: row.get(col) for col in schema}, sort_keys=True) for row in rows]
    return "\n".join(lines) + "\n"


def run(cfg, out_dir=".", seed=None, threads=1):
    """Dispatch to the experiment pipeline and persist results atomically."""
    if seed is not None:
        cfg.values["ensemble"]["seed"] = int(seed)
    t0 = time.perf_counter()
    runner = {
        "validate": _run_validate,
        "simulate": _run_simulate,
        "moments": _run_moments,
        "gaussianity": _run_gaussianity,
        "memory-tilt": _run_memory_tilt,
        "memory-chroma": _run_memory_chroma,
        "jump-check": _run_jump_check,
    }[cfg.kind]
    try:
        schema, rows, meta = runner(cfg, threads)
    except (ValueError, FloatingPointError) as exc:
        raise GuardError(str(exc)) from exc
    wall = time.perf_counter() - t0

    record = ResultRecord(
        experiment=cfg.kind,
        config_hash=cfg.config_hash(),
        seed=cfg.values["ensemble"]["seed"],
        schema=tuple(schema),
        rows=rows,
        wall_clock_s=wall,
        meta=meta,
    )
    stem = f"{cfg.kind}_{record.config_hash}"
    fmt = cfg.values["output"]["format"]
    data_path = os.path.join(out_dir, cfg.values["output"]["path"], f"{stem}.{fmt}")
    text = _rows_to_csv(schema, rows) if fmt == "csv" else _rows_to_ndjson(schema, rows)
    _atomic_write(data_path, text)
    meta_path = os.path.join(out_dir, cfg.values["output"]["path"], f"{stem}.record.json")
    _atomic_write(
        meta_path,
        json.dumps(
            {
                "experiment": record.experiment,
                "config_hash": record.config_hash,
                "seed": record.seed,
                "n_rows": len(rows),
                "schema": list(schema),
                "wall_clock_s": record.wall_clock_s,
                "meta": meta,
            },
            sort_keys=True,
            indent=2,
        )
        + "\n",
    )
    record.paths = [data_path, meta_path]
    return record


def export_plotdata(record, which=None):
    """Long-format CSV text (x, series, value, stderr) for any plotting tool."""
    schema = record.schema
    rows = record.rows
    out = ["x,series,value,stderr"]
    known = set()
    if {"x", "series", "value", "stderr"} <= set(schema):
        for row in rows:
            known.add(row["series"])
            if which is None or row["series"] == which:
                out.append(
                    f"{_fmt_cell(row['x'])},{row['series']},{_fmt_cell(row['value'])},{_fmt_cell(row['stderr'])}"
                )
    else:
        # project structured schemas onto (x, series, value, stderr)
        xcol = next((c for c in ("h", "dkappa", "tau", "eta", "x") if c in schema), schema[0])
        for row in rows:
            for col in schema:
                if col in (xcol, "scan_id") or not isinstance(row.get(col), (int, float)):
                    continue
                series = f"{row.get('scan_id', record.experiment)}.{col}"
                known.add(series)
                if which is None or series == which:
                    out.append(
                        f"{_fmt_cell(row[xcol])},{series},{_fmt_cell(row[col])},0.0"
                    )
    if which is not None and which not in known:
        raise ValueError(f"unknown metric {which!r}; available: {sorted(known)}")
    return "\n".join(out) + "\n"


def _collect_ensemble(cfg, specs, z_stops, collector, threads):
    """Run the ensemble in index ranges (possibly threaded), reduce in order."""
    regime, grid, model = cfg.build_regime(), cfg.build_grid(), cfg.build_model()
    ensemble = cfg.build_ensemble()
    dz = cfg.values["solver"]["dz"]
    n = ensemble.n_realizations
    workers = max(1, int(threads))
    partials = []

    def work(rng_range):
        lo, hi = rng_range
        out = []
        for first, blocks in propagate_ensemble(
            regime, grid, model, specs, z_stops, dz, ensemble, start=lo, stop=hi
        ):
            out.append((first, collector(blocks)))
        return out

    if workers == 1:
        partials = work((0, n))
    else:
        chunk = max(ensemble.batch_size, -(-n // workers))
        ranges = [(lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for res in pool.map(work, ranges):
                partials.extend(res)
    partials.sort(key=lambda t: t[0])
    return [p for _, p in partials]


def _run_validate(cfg, threads):
    model = cfg.build_model()
    regime = cfg.build_regime()
    report = validate_model(model)
    rows = []
    for name in (
        "spectrum_nonnegative",
        "symmetric",
        "strict_maximum_at_zero",
        "hessian_negative_definite",
        "hessian_matches_sigma2",
        "integrable",
    ):
        rows.append({"check": name, "passed": int(getattr(report, name)), "residual": 0.0})
    rows.append({"check": "inversion_residual", "passed": int(report.passed), "residual": report.inversion_residual})
    rows.append({"check": "sigma_residual", "passed": int(report.passed), "residual": report.sigma_residual})
    meta = {"notes": report.notes + regime.soft_notes(), "passed": report.passed}
    return ("check", "passed", "residual"), rows, meta


def _run_simulate(cfg, threads):
    regime, grid = cfg.build_regime(), cfg.build_grid()
    source = cfg.build_source()
    d = regime.d
    e0 = init_source(regime, grid, source).energy()

    def collector(blocks):
        u = blocks[regime.z0][:, 0]
        axes = tuple(range(1, d + 1))
        energy = np.sum(np.abs(u) ** 2, axis=axes) * grid.spacing**d
        mean = u.mean(axis=axes)
        return energy, mean

    rows = []
    for i, (energy, mean) in enumerate(_collect_ensemble(cfg, [source], [regime.z0], collector, threads)):
        rows.append(
            {
                "batch": i,
                "n": int(len(energy)),
                "energy_mean": float(energy.mean()),
                "energy_rel_drift_max": float(np.max(np.abs(energy / e0 - 1.0))),
                "mean_re": float(mean.mean().real),
                "mean_im": float(mean.mean().imag),
            }
        )
    return (
        ("batch", "n", "energy_mean", "energy_rel_drift_max", "mean_re", "mean_im"),
        rows,
        {"z": cfg.build_regime().z0},
    )


def _run_moments(cfg, threads):
    regime, grid = cfg.build_regime(), cfg.build_grid()
    model, source = cfg.build_model(), cfg.build_source()
    d = regime.d
    taus = cfg.values["moments"]["tau_values"]
    shifts = []
    for tau in taus:
        s = regime.eta * tau / grid.spacing
        if abs(s - round(s)) > 1e-9:
            raise ValueError(f"eta*tau for tau={tau} is not a whole number of grid cells")
        shifts.append(int(round(s)))

    def collector(blocks):
        u = blocks[regime.z0][:, 0]
        axes = tuple(range(1, d + 1))
        mean_field = u.mean(axis=axes)
        lags = [
            (u * np.conj(np.roll(u, -s, axis=1))).mean(axis=axes) for s in shifts
        ]
        return mean_field, lags

    mean_chunks, lag_chunks = [], []
    for mean_field, lags in _collect_ensemble(cfg, [source], [regime.z0], collector, threads):
        mean_chunks.append(mean_field)
        lag_chunks.append(lags)

    rows = []
    mu10 = statistics.reduce_moment(np.concatenate(mean_chunks))
    rows.append(
        {
            "moment_id": "mu10",
            "p": 1,
            "q": 0,
            "points": "h:0;x:0",
            "value_re": mu10.value.real,
            "value_im": mu10.value.imag,
            "stderr": mu10.stderr,
            "n": mu10.n_samples,
        }
    )
    for j, tau in enumerate(taus):
        samples = np.concatenate([c[j] for c in lag_chunks])
        est = statistics.reduce_moment(samples)
        rows.append(
            {
                "moment_id": f"mu11_tau_{tau:g}",
                "p": 1,
                "q": 1,
                "points": f"x:{tau:g};x:0",
                "value_re": est.value.real,
                "value_im": est.value.imag,
                "stderr": est.stderr,
                "n": est.n_samples,
            }
        )
    schema = ("moment_id", "p", "q", "points", "value_re", "value_im", "stderr", "n")
    return schema, rows, {"z": regime.z0}


def _run_gaussianity(cfg, threads):
    regime, grid = cfg.build_regime(), cfg.build_grid()
    source = cfg.build_source()
    d = regime.d
    x2 = cfg.values["gaussianity"]["x2"]
    s = regime.eta * x2 / grid.spacing
    if abs(s - round(s)) > 1e-9:
        raise ValueError("eta*x2 must be a whole number of grid cells")
    s = int(round(s))

    def collector(blocks):
        u = blocks[regime.z0][:, 0]
        axes = tuple(range(1, d + 1))
        p1 = u[(slice(None),) + (0,) * d]
        idx = (slice(None), s) + (0,) * (d - 1)
        p2 = u[idx]
        m2 = (np.abs(u) ** 2).mean(axis=axes)
        m4 = (np.abs(u) ** 4).mean(axis=axes)
        return p1, p2, m2, m4

    chunks = _collect_ensemble(cfg, [source], [regime.z0], collector, threads)
    p1 = np.concatenate([c[0] for c in chunks])
    p2 = np.concatenate([c[1] for c in chunks])
    m2 = np.concatenate([c[2] for c in chunks])
    m4 = np.concatenate([c[3] for c in chunks])
    report = statistics.gaussianity_report(np.stack([p1, p2], axis=1), m2, m4)
    rows = [
        {"x": "mu22", "series": "z_score", "value": report.z_mu22, "stderr": 0.0},
        {"x": "mu21", "series": "z_score", "value": report.z_mu21, "stderr": 0.0},
        {"x": "mu20", "series": "z_score", "value": report.z_mu20, "stderr": 0.0},
        {"x": "contrast", "series": "contrast", "value": report.contrast, "stderr": report.contrast_stderr},
        {"x": "mu22", "series": "value_re", "value": report.mu22.value.real, "stderr": report.mu22.stderr},
        {"x": "prediction", "series": "value_re", "value": report.prediction.real, "stderr": report.prediction_stderr},
    ]
    meta = {"n_samples": report.n_samples, "x2": x2}
    return ("x", "series", "value", "stderr"), rows, meta


def _run_memory_tilt(cfg, threads):
    regime, grid = cfg.build_regime(), cfg.build_grid()
    model = cfg.build_model()
    tau = cfg.values["tilt"]["tau"]
    z, w0, s2 = regime.z0, regime.omega0, model.sigma2
    opt_k = -1.5 * w0 * tau / z
    half = 2.0 * abs(opt_k) if opt_k != 0 else 1.0
    kgrid = tuple(np.linspace(-half, half, 41))
    scan = memory_effects.TiltScan(
        tau=tau, dkappa_grid=kgrid, dkappa_prime_grid=kgrid, z=z, omega0=w0, sigma2=s2
    )
    rows = []
    for k in kgrid:
        val = memory_effects.tilt_correlation(scan, k, k)
        rows.append(
            {
                "scan_id": "analytic",
                "tau": tau,
                "dkappa": float(k),
                "dkappa_prime": float(k),
                "value_re": val.real,
                "value_im": val.imag,
                "abs": abs(val),
                "stderr": 0.0,
            }
        )
    opt = memory_effects.tilt_optimum(scan)
    meta = {
        "dkappa_refined": opt.dkappa_refined,
        "dkappa_analytic": opt.dkappa_analytic,
    }
    if cfg.values["tilt"]["mc"]:
        mc_tau = cfg.values["tilt"]["mc_tau"]
        j = cfg.values["tilt"]["n_side"]
        dk_cell = 2.0 * math.pi / (regime.epsilon * grid.length)
        dka = [i * dk_cell for i in range(-j, j + 1)]
        dkp = [2 * i * dk_cell for i in range(-j, j + 1)]
        res = memory_effects.tilt_mc_scan(
            regime, grid, model, mc_tau, dka, dkp, cfg.values["solver"]["dz"], cfg.build_ensemble()
        )
        for (dk, dkq), est in sorted(res.items()):
            rows.append(
                {
                    "scan_id": "mc",
                    "tau": mc_tau,
                    "dkappa": dk,
                    "dkappa_prime": dkq,
                    "value_re": est.value.real,
                    "value_im": est.value.imag,
                    "abs": abs(est.value),
                    "stderr": est.stderr,
                }
            )
    schema = ("scan_id", "tau", "dkappa", "dkappa_prime", "value_re", "value_im", "abs", "stderr")
    return schema, rows, meta


def _run_memory_chroma(cfg, threads):
    regime = cfg.build_regime()
    model = cfg.build_model()
    Omega = cfg.values["chroma"]["omega_offset"]
    h_max = cfg.values["chroma"]["h_max"]
    if h_max <= 0:
        h_max = 2.0 * abs(regime.z0 * Omega / (3.0 * regime.omega0)) or 0.5
    hs = tuple(np.linspace(-h_max, h_max, cfg.values["chroma"]["n_h"]))
    scan = memory_effects.ChromaScan(
        Omega=Omega, h_grid=hs, z0=regime.z0, omega0=regime.omega0,
        sigma2=model.sigma2, dim=regime.d,
    )
    rows = []
    for h, mag in memory_effects.chroma_profile(scan):
        rows.append(
            {"scan_id": "profile", "Omega": Omega, "h": float(h),
             "value_re": mag, "value_im": 0.0, "abs": mag, "stderr": 0.0}
        )
    imp = memory_effects.chroma_improvement(scan)
    rows.append(
        {"scan_id": "h_opt", "Omega": Omega, "h": imp.h_opt,
         "value_re": imp.ratio, "value_im": 0.0, "abs": imp.ratio, "stderr": 0.0}
    )
    meta = {
        "h_opt": imp.h_opt,
        "h_refined": imp.h_refined,
        "small_offset_estimate": imp.small_offset_estimate,
        "improvement_ratio": imp.ratio,
        "quarter_power_factor": imp.quarter_power_factor,
        "raw_factor": imp.raw_factor,
    }
    schema = ("scan_id", "Omega", "h", "value_re", "value_im", "abs", "stderr")
    return schema, rows, meta


def _run_jump_check(cfg, threads):
    regime = cfg.build_regime()
    model = cfg.build_model()
    jc = cfg.values["jump"]
    rng = np.random.default_rng(cfg.values["ensemble"]["seed"])
    params_list = [
        jump_process.JumpProcessParams(eta=e, omega0=regime.omega0, model=model)
        for e in jc["etas"]
    ]
    entries, monotone = jump_process.brownian_limit_check(
        params_list, jc["z"], jc["n_paths"], rng
    )
    rows = []
    for e in entries:
        rows.append({"x": e.eta, "series": "var_z", "value": e.var_z, "stderr": 0.0})
        rows.append(
            {"x": e.eta, "series": "excess_kurtosis", "value": e.excess_kurtosis,
             "stderr": e.kurtosis_stderr}
        )
    pot = jump_process.PotentialSpec(
        Omega=jc["omega_offset"], omega0=regime.omega0, zeta=jc["zeta"][: regime.d]
    )
    rho_params = jump_process.JumpProcessParams(
        eta=jc["rho_eta"], omega0=regime.omega0, model=model
    )
    gamma0 = jc["gamma0"]
    xi0 = jc["xi0"][: regime.d]
    est = jump_process.rho_estimator(
        rho_params, pot, lambda x: np.exp(-gamma0 * np.sum(x**2, axis=-1)),
        0.0, jc["z"], xi0, jc["rho_paths"], rng,
    )
    oracle = jump_process.brownian_rho(
        pot, gamma0, 0.0, jc["z"], xi0, model.sigma2, regime.omega0, dim=regime.d
    )
    rows.append({"x": jc["rho_eta"], "series": "rho_mc_re", "value": est.value.real, "stderr": est.stderr})
    rows.append({"x": jc["rho_eta"], "series": "rho_oracle_re", "value": oracle.real, "stderr": 0.0})
    meta = {
        "kurtosis_monotone": bool(monotone),
        "rho_mc": [est.value.real, est.value.imag],
        "rho_oracle": [oracle.real, oracle.imag],
        "rho_stderr": est.stderr,
    }
    return ("x", "series", "value", "stderr"), rows, meta


def main(argv=None):
    parser = argparse.ArgumentParser(prog="specklesim", description=__doc__)
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind)
        p.add_argument("--config", required=True)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument(
            "--threads", type=int, default=int(os.environ.get("SPECKLE_THREADS", "1"))
        )
        p.add_argument("--out", default=".")
    args = parser.parse_args(argv)

    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
        cfg = parse_config(text, kind=args.kind)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        for ln, msg in exc.errors:
            print(f"{args.config}:{ln}: {msg}", file=sys.stderr)
        return 2

    try:
        record = run(cfg, out_dir=args.out, seed=args.seed, threads=args.threads)
    except GuardError as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return 3
    for path in record.paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
