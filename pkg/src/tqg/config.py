"""Experiment configuration: strict JSON parsing and run orchestration.

A config file is a single JSON object; unknown keys anywhere are rejected by
name.  Per-field random streams derive from the top-level seed and a fixed
component tag, so a config plus seed pins every number in the run.
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io as tqg_io
from .dynamics import TQGDataSet, bathymetry_velocity
from .errors import ConfigError, TqgError
from .integrate import RaySpec, integrate_ray
from .lemmas import (
    LEMMA_NAMES,
    lattice_sum,
    run_split_trials,
    verify_algebraic,
    verify_convest,
    verify_veltovor,
)
from .norms import estimate_radius
from .spectral import (
    SpectralField,
    SpectralGrid,
    VectorSpectralField,
    from_modes,
    make_grid,
    perp_gradient,
    random_gevrey_field,
    zero_field,
)
from .tracker import (
    GevreyTracker,
    bound_monitor,
    calibrate_c,
    trace_from_record,
    track_ray,
)

__all__ = ["ExperimentConfig", "parse_config", "build_dataset", "run_experiment"]

log = logging.getLogger("tqg.config")

MODES = ("simulate", "verify", "radius", "sweep")

# Component tags for seed derivation (documented in the README).
_FIELD_TAGS = {"b0": 1, "q0": 2, "f": 3, "uh_stream": 4, "h": 5}

_DEFAULTS = {"stride": 10, "ds": 1e-3, "N": 64}


@dataclass(frozen=True)
class LemmaConfig:
    name: str
    r: float = 3.0
    phi: float = 0.2
    trials: int = 100
    radii: tuple[float, ...] = ()
    phi_values: tuple[float, ...] = (0.0, 0.1, 0.5, 1.0)
    grid_max: float = 10.0
    grid_step: float = 0.1


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str
    n: int
    seed: int
    phi0: float
    ray_theta: float
    ray_s_max: float
    ray_ds: float
    stride: int
    data: dict
    c: float | None = None
    out: str | None = None
    thetas: tuple[float, ...] = ()
    lemma: LemmaConfig | None = None
    shell_min: float = 2.0
    shell_max: float | None = None
    gamma: bool = False
    method: str = "pseudospectral"


def _require_keys(obj: dict, allowed: set[str], context: str) -> None:
    for key in obj:
        if key not in allowed:
            where = f"{context}.{key}" if context else key
            raise ConfigError(f"unknown config key '{where}'")


def _get_number(obj: dict, key: str, default=None, context: str = ""):
    if key not in obj:
        if default is None:
            where = f"{context}.{key}" if context else key
            raise ConfigError(f"missing required config key '{where}'")
        return default
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        where = f"{context}.{key}" if context else key
        raise ConfigError(f"config key '{where}' must be a number, got {val!r}")
    return val


_FIELD_SPEC_KEYS = {
    "zero": set(),
    "gevrey": {"phi_star", "p", "amplitude", "real", "kmax"},
    "modes": {"entries", "real"},
    "file": {"path"},
}


def _validate_field_spec(spec, context: str) -> dict:
    if not isinstance(spec, dict):
        raise ConfigError(f"config key '{context}' must be an object")
    kind = spec.get("kind")
    if kind not in _FIELD_SPEC_KEYS:
        raise ConfigError(
            f"config key '{context}.kind' must be one of "
            f"{sorted(_FIELD_SPEC_KEYS)}, got {kind!r}"
        )
    _require_keys(spec, _FIELD_SPEC_KEYS[kind] | {"kind"}, context)
    if kind == "modes":
        entries = spec.get("entries")
        if not isinstance(entries, list) or not entries:
            raise ConfigError(f"config key '{context}.entries' must be a nonempty list")
        for e in entries:
            if (
                not isinstance(e, list)
                or len(e) != 4
                or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in e)
            ):
                raise ConfigError(
                    f"config key '{context}.entries' items must be "
                    f"[k1, k2, re, im] numbers, got {e!r}"
                )
    if kind == "file" and not isinstance(spec.get("path"), str):
        raise ConfigError(f"config key '{context}.path' must be a string")
    return spec


def parse_config(path) -> ExperimentConfig:
    """Parse and validate a JSON experiment configuration."""
    p = Path(path)
    try:
        raw = json.loads(p.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {p}") from None
    except json.JSONDecodeError as err:
        raise ConfigError(f"config file is not valid JSON: {err}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")

    allowed = {
        "mode", "N", "seed", "phi0", "ray", "stride", "data", "c", "out",
        "thetas", "lemma", "radius", "gamma", "method",
    }
    _require_keys(raw, allowed, "")

    mode = raw.get("mode")
    if mode not in MODES:
        raise ConfigError(f"config key 'mode' must be one of {list(MODES)}, got {mode!r}")

    n = int(_get_number(raw, "N", _DEFAULTS["N"]))
    try:
        make_grid(n)
    except ValueError as err:
        raise ConfigError(str(err)) from None

    seed = raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2 ** 64:
        raise ConfigError(f"config key 'seed' must be an unsigned 64-bit integer, got {seed!r}")

    ray = raw.get("ray", {})
    if not isinstance(ray, dict):
        raise ConfigError("config key 'ray' must be an object")
    _require_keys(ray, {"theta", "s_max", "ds"}, "ray")
    theta = float(_get_number(ray, "theta", 0.0, "ray"))
    s_max = float(_get_number(ray, "s_max", 0.0, "ray"))
    ds = float(_get_number(ray, "ds", _DEFAULTS["ds"], "ray"))
    if mode in ("simulate", "radius", "sweep"):
        try:
            RaySpec(theta=theta, s_max=s_max, ds=ds)
        except ValueError as err:
            raise ConfigError(f"config key 'ray': {err}") from None

    stride = raw.get("stride", _DEFAULTS["stride"])
    if isinstance(stride, bool) or not isinstance(stride, int) or stride < 1:
        raise ConfigError(f"config key 'stride' must be a positive integer, got {stride!r}")

    data = raw.get("data", {})
    if not isinstance(data, dict):
        raise ConfigError("config key 'data' must be an object")
    _require_keys(data, {"b0", "q0", "f", "uh_stream", "h"}, "data")
    if "uh_stream" in data and "h" in data:
        raise ConfigError("config keys 'data.uh_stream' and 'data.h' are mutually exclusive")
    for key, spec in data.items():
        _validate_field_spec(spec, f"data.{key}")

    phi0 = float(_get_number(raw, "phi0", 0.25))
    if phi0 <= 0:
        raise ConfigError(f"config key 'phi0' must be positive, got {phi0}")

    c = raw.get("c")
    if c is not None:
        c = float(_get_number(raw, "c"))
        if c <= 0:
            raise ConfigError(f"config key 'c' must be positive, got {c}")

    thetas = raw.get("thetas", [])
    if not isinstance(thetas, list) or any(
        isinstance(t, bool) or not isinstance(t, (int, float)) for t in thetas
    ):
        raise ConfigError("config key 'thetas' must be a list of numbers")
    if mode == "sweep" and not thetas:
        raise ConfigError("mode 'sweep' requires a nonempty 'thetas' list")
    for t in thetas:
        if not -math.pi / 2 < t < math.pi / 2:
            raise ConfigError(
                f"config key 'thetas' entries must lie strictly inside (-pi/2, pi/2), got {t}"
            )

    lemma_cfg = None
    if "lemma" in raw:
        lem = raw["lemma"]
        if not isinstance(lem, dict):
            raise ConfigError("config key 'lemma' must be an object")
        _require_keys(
            lem,
            {"name", "r", "phi", "trials", "radii", "phi_values", "grid_max", "grid_step"},
            "lemma",
        )
        name = lem.get("name")
        if name not in LEMMA_NAMES:
            raise ConfigError(
                f"config key 'lemma.name' must be one of {list(LEMMA_NAMES)}, got {name!r}"
            )
        trials = lem.get("trials", 100)
        if isinstance(trials, bool) or not isinstance(trials, int) or trials < 1:
            raise ConfigError(f"config key 'lemma.trials' must be a positive integer, got {trials!r}")
        lemma_cfg = LemmaConfig(
            name=name,
            r=float(_get_number(lem, "r", 3.0, "lemma")),
            phi=float(_get_number(lem, "phi", 0.2, "lemma")),
            trials=trials,
            radii=tuple(float(x) for x in lem.get("radii", [])),
            phi_values=tuple(float(x) for x in lem.get("phi_values", (0.0, 0.1, 0.5, 1.0))),
            grid_max=float(_get_number(lem, "grid_max", 10.0, "lemma")),
            grid_step=float(_get_number(lem, "grid_step", 0.1, "lemma")),
        )
    if mode == "verify" and lemma_cfg is None:
        raise ConfigError("mode 'verify' requires a 'lemma' object (or the --lemma flag)")

    radius_opts = raw.get("radius", {})
    if not isinstance(radius_opts, dict):
        raise ConfigError("config key 'radius' must be an object")
    _require_keys(radius_opts, {"shell_min", "shell_max"}, "radius")
    shell_min = float(_get_number(radius_opts, "shell_min", 2.0, "radius"))
    shell_max = radius_opts.get("shell_max")
    if shell_max is not None:
        shell_max = float(_get_number(radius_opts, "shell_max", None, "radius"))

    gamma = raw.get("gamma", False)
    if not isinstance(gamma, bool):
        raise ConfigError(f"config key 'gamma' must be a boolean, got {gamma!r}")

    method = raw.get("method", "pseudospectral")
    if method not in ("pseudospectral", "convolution"):
        raise ConfigError(f"config key 'method' must be 'pseudospectral' or 'convolution', got {method!r}")

    out = raw.get("out")
    if out is not None and not isinstance(out, str):
        raise ConfigError(f"config key 'out' must be a string path, got {out!r}")

    return ExperimentConfig(
        mode=mode,
        n=n,
        seed=seed,
        phi0=phi0,
        ray_theta=theta,
        ray_s_max=s_max,
        ray_ds=ds,
        stride=stride,
        data=data,
        c=c,
        out=out,
        thetas=tuple(float(t) for t in thetas),
        lemma=lemma_cfg,
        shell_min=shell_min,
        shell_max=shell_max,
        gamma=gamma,
        method=method,
    )


def _field_rng_seed(seed: int, tag: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=int(seed), spawn_key=(int(tag),))


def _build_field(spec: dict, grid: SpectralGrid, seed: int, tag: int, base: Path) -> SpectralField:
    kind = spec["kind"]
    if kind == "zero":
        return zero_field(grid)
    if kind == "gevrey":
        return random_gevrey_field(
            grid,
            _field_rng_seed(seed, tag),
            phi_star=float(spec.get("phi_star", 0.5)),
            p=float(spec.get("p", 2.0)),
            amplitude=float(spec.get("amplitude", 1.0)),
            real=bool(spec.get("real", True)),
            kmax=int(spec["kmax"]) if "kmax" in spec else None,
        )
    if kind == "modes":
        entries = [((int(e[0]), int(e[1])), complex(float(e[2]), float(e[3]))) for e in spec["entries"]]
        return from_modes(grid, entries, enforce_real=bool(spec.get("real", False)))
    if kind == "file":
        path = Path(spec["path"])
        if not path.is_absolute():
            path = base / path
        try:
            obj = tqg_io.read_json(path)
        except FileNotFoundError:
            raise ConfigError(f"field file not found: {path}") from None
        try:
            return tqg_io.field_from_json(obj, grid)
        except ValueError as err:
            raise ConfigError(f"field file {path}: {err}") from None
    raise ConfigError(f"unknown field kind {kind!r}")


def build_dataset(cfg: ExperimentConfig, base: Path | None = None) -> TQGDataSet:
    """Materialise the problem data described by a configuration."""
    base = base or Path.cwd()
    grid = make_grid(cfg.n)
    z = zero_field(grid)
    b0 = _build_field(cfg.data["b0"], grid, cfg.seed, _FIELD_TAGS["b0"], base) if "b0" in cfg.data else z
    q0 = _build_field(cfg.data["q0"], grid, cfg.seed, _FIELD_TAGS["q0"], base) if "q0" in cfg.data else z
    f = _build_field(cfg.data["f"], grid, cfg.seed, _FIELD_TAGS["f"], base) if "f" in cfg.data else z
    if "uh_stream" in cfg.data:
        stream = _build_field(cfg.data["uh_stream"], grid, cfg.seed, _FIELD_TAGS["uh_stream"], base)
        u_h = perp_gradient(stream)
    elif "h" in cfg.data:
        h = _build_field(cfg.data["h"], grid, cfg.seed, _FIELD_TAGS["h"], base)
        u_h = bathymetry_velocity(h)
    else:
        u_h = VectorSpectralField(z, z)
    try:
        return TQGDataSet(u_h=u_h, f=f, b0=b0, q0=q0, phi0=cfg.phi0)
    except ValueError as err:
        raise ConfigError(str(err)) from None


def _simulate_one(cfg: ExperimentConfig, data: TQGDataSet, theta: float, run_id: str):
    ray = RaySpec(theta=theta, s_max=cfg.ray_s_max, ds=cfg.ray_ds)
    return track_ray(
        data,
        ray,
        c=cfg.c,
        stride=cfg.stride,
        method=cfg.method,
        include_gamma=cfg.gamma,
        run_id=run_id,
    )


def _write_simulate_outputs(out: Path, trajectory, record, trace, report) -> None:
    stride_rows = []
    mags = record.shell_mags
    pow_b = mags ** 8.0
    pow_q = mags ** 6.0
    for s, _state in trajectory.samples:
        i = int(round(s / record.ds)) if record.ds else 0
        i = min(i, record.n_samples - 1)
        b_h4 = math.sqrt(float(np.sum(pow_b * record.prof_b[i])))
        q_h3 = math.sqrt(float(np.sum(pow_q * record.prof_q[i])))
        stride_rows.append((s, b_h4, q_h3, trace.g_vals[i], trace.phi_vals[i]))
    tqg_io.write_trajectory_csv(out / "trajectory.csv", stride_rows)
    tqg_io.write_trace_csv(out / "radius_trace.csv", trace)
    tqg_io.write_json(out / "monitor.json", tqg_io.monitor_report_dict(report))
    summary = {
        "c": trace.c,
        "theta": trace.theta,
        "D_data": trace.d_data,
        "n_steps": record.n_samples - 1,
        "violations": len(report.violations),
    }
    if trajectory.error is not None:
        summary["error"] = {"s": trajectory.error.s, "message": trajectory.error.message}
    tqg_io.write_json(out / "summary.json", summary)


def _run_verify(cfg: ExperimentConfig, out: Path) -> int:
    lem = cfg.lemma
    grid = make_grid(cfg.n)
    if lem.name == "convest":
        report = verify_convest(grid, lem.r, lem.phi, lem.trials, cfg.seed)
        tqg_io.write_json(out / "lemma_convest.json", tqg_io.lemma_report_dict(report))
    elif lem.name == "veltovor":
        report = verify_veltovor(grid, lem.r, lem.trials, cfg.seed)
        tqg_io.write_json(out / "lemma_veltovor.json", tqg_io.lemma_report_dict(report))
    elif lem.name == "algebraic":
        pts = np.arange(0.0, lem.grid_max + lem.grid_step / 2.0, lem.grid_step)
        report = verify_algebraic(lem.r, lem.phi_values, pts, pts)
        tqg_io.write_json(out / "lemma_algebraic.json", tqg_io.lemma_report_dict(report))
    elif lem.name == "lattice":
        radii = list(lem.radii) or np.unique(np.round(np.geomspace(8, 512, 12))).tolist()
        table = lattice_sum(lem.r, radii)
        tqg_io.write_csv(
            out / "lattice.csv",
            ["R", "partial_sum", "tail_estimate"],
            tqg_io.lattice_table_rows(table),
            preamble=[f"# r={tqg_io.fmt(lem.r)}"],
        )
        tqg_io.write_json(
            out / "lattice_summary.json",
            {
                "r": table.r,
                "limit": table.limit,
                "tail_coefficient": table.tail_coefficient,
            },
        )
    elif lem.name == "split":
        summary = run_split_trials(grid, lem.r, lem.phi, lem.trials, cfg.seed)
        tqg_io.write_json(out / "lemma_split.json", tqg_io.split_summary_dict(summary))
    else:  # unreachable after validation
        raise ConfigError(f"unknown lemma {lem.name!r}")
    return 0


def run_experiment(cfg: ExperimentConfig, out_dir, threads: int = 1, strict: bool = False) -> int:
    """Execute a configuration; writes artifacts into out_dir, returns exit code.

    Module errors are caught, recorded as error.json {module, operation,
    message}, and mapped to the exit code: 2 for configuration problems,
    1 for numerical failures.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    log.info("run_experiment: mode=%s N=%d seed=%d out=%s", cfg.mode, cfg.n, cfg.seed, out)
    try:
        return _dispatch(cfg, out, threads, strict)
    except TqgError as err:
        tqg_io.write_json(
            out / "error.json",
            {"module": err.module, "operation": err.operation, "message": str(err)},
        )
        log.error("run failed: %s", err)
        return 2 if isinstance(err, ConfigError) else 1


def _dispatch(cfg: ExperimentConfig, out: Path, threads: int, strict: bool) -> int:
    if cfg.mode == "verify":
        try:
            return _run_verify(cfg, out)
        except ValueError as err:
            raise ConfigError(str(err)) from None

    data = build_dataset(cfg)

    if cfg.mode == "simulate":
        trajectory, record, trace, report = _simulate_one(cfg, data, cfg.ray_theta, "run")
        _write_simulate_outputs(out, trajectory, record, trace, report)
        if trajectory.error is not None:
            return 1
        if strict and report.violations:
            return 1
        return 0

    if cfg.mode == "radius":
        ray = RaySpec(theta=cfg.ray_theta, s_max=cfg.ray_s_max, ds=cfg.ray_ds)
        trajectory = integrate_ray(data, ray, stride=cfg.stride, method=cfg.method)
        shell_max = cfg.shell_max if cfg.shell_max is not None else cfg.n / 3.0
        samples = []
        for s, state in trajectory.samples:
            try:
                fit_b = estimate_radius(state.b, cfg.shell_min, shell_max)
                fit_q = estimate_radius(state.q, cfg.shell_min, shell_max)
            except ValueError as err:
                raise TqgError(
                    f"radius fit failed at s={s:.6g}: {err}",
                    module="norms",
                    operation="estimate_radius",
                ) from None
            samples.append(
                {
                    "s": s,
                    "b": tqg_io.radius_fit_dict(fit_b),
                    "q": tqg_io.radius_fit_dict(fit_q),
                }
            )
        tqg_io.write_json(out / "radius.json", {"samples": samples})
        return 1 if trajectory.error is not None else 0

    if cfg.mode == "sweep":
        # Integrate first, calibrate a single c across the whole ensemble,
        # then monitor every ray against that shared constant.
        def one(theta: float):
            ray = RaySpec(theta=theta, s_max=cfg.ray_s_max, ds=cfg.ray_ds)
            tracker = GevreyTracker(data, theta=theta, ds=cfg.ray_ds)
            trajectory = integrate_ray(
                data, ray, stride=cfg.stride, observer=tracker, method=cfg.method
            )
            return trajectory, tracker.finish(f"theta={theta:.6g}")

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(one, cfg.thetas))
        else:
            results = [one(t) for t in cfg.thetas]
        records = [rec for _traj, rec in results]
        c = cfg.c if cfg.c is not None else calibrate_c(records)
        rows = []
        failed = False
        any_violation = False
        for theta, (trajectory, record) in zip(cfg.thetas, results):
            trace = trace_from_record(record, c, include_gamma=cfg.gamma)
            report = bound_monitor(trace, record.run_id)
            if report.violations:
                any_violation = True
                first = report.first_violation.s
                passing = trace.s[trace.s < first]
                s_star = float(passing[-1]) if len(passing) else 0.0
            else:
                s_star = float(trace.s[-1]) if trace.n_samples else 0.0
            if trajectory.error is not None:
                failed = True
            rows.append((theta, s_star))
        tqg_io.write_csv(
            out / "region_map.csv",
            ["theta", "s_star"],
            rows,
            preamble=[f"# c={tqg_io.fmt(c)}"],
        )
        if failed:
            return 1
        if strict and any_violation:
            return 1
        return 0

    raise ConfigError(f"unknown mode {cfg.mode!r}")  # unreachable
