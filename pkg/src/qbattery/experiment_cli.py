"""Config-driven parameter sweeps over the battery figures of merit, and the
``qbattery`` command-line interface.

A sweep config is a plain-text ``key = value`` file ("#" starts a comment).
Values of the form ``start : stop : count`` declare swept ranges; everything
else is a fixed parameter.  Rows are emitted in lexicographic order over the
declared ranges regardless of how many workers computed them, so identical
configs give byte-identical CSV bodies.
"""

from __future__ import annotations

import argparse
import ast
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import __version__
from . import closed_form_oracles as oracles
from .battery_dynamics import delta_p_max, ergotropy, evolve_normalized, work
from .errors import DegenerateGroundStateError, OracleDomainError, QBatteryError
from .model_builders import (
    PT,
    PT_HERMITIAN,
    RT,
    RT_HERMITIAN,
    BatterySpec,
    ChargerSpec,
    build_battery_xyz,
    build_charger,
    build_noninteracting_battery,
    build_pt_charger,
    build_pt_hermitian_charger,
    build_rt_charger,
    normalize_spectrum,
)
from .state_prep import ground_state, thermal_state

DEGEN_MARKER = "DEGEN"
_J_MARGIN = 0.1  # ground-state degeneracy margin for the (h, J) map


@dataclass
class SweepConfig:
    """Parsed sweep configuration."""

    experiment: str
    ranges: dict[str, tuple[float, float, int]] = field(default_factory=dict)
    fixed: dict[str, object] = field(default_factory=dict)
    t_max: float = 10.0
    n_grid: int = 2000
    output_path: str = "sweep.csv"
    workers: int = 0  # 0 means "use available parallelism"

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            known = ", ".join(sorted(EXPERIMENTS))
            raise ValueError(f"unknown experiment {self.experiment!r}; known: {known}")
        if not self.ranges:
            raise ValueError("at least one swept range is required")
        for name, (start, stop, count) in self.ranges.items():
            if count < 1:
                raise ValueError(f"range {name!r} needs count >= 1, got {count}")
            if not (math.isfinite(start) and math.isfinite(stop)):
                raise ValueError(f"range {name!r} has non-finite endpoints")
        if self.t_max <= 0:
            raise ValueError(f"t_max must be > 0, got {self.t_max}")
        if self.n_grid < 16:
            raise ValueError(f"n_grid must be >= 16, got {self.n_grid}")
        spec = EXPERIMENTS[self.experiment]
        given = set(self.ranges) | set(self.fixed)
        missing = [p for p in spec.required if p not in given and p not in spec.defaults]
        if missing:
            raise ValueError(f"{self.experiment} is missing parameters: {missing}")
        allowed = set(spec.required) | set(spec.defaults)
        unknown = [p for p in given if p not in allowed]
        if unknown:
            raise ValueError(f"{self.experiment} does not take parameters: {unknown}")
        bad_ranges = [p for p in self.ranges if p not in spec.sweepable]
        if bad_ranges:
            raise ValueError(f"{self.experiment} cannot sweep: {bad_ranges}")


@dataclass
class SweepResult:
    """Tabular sweep output: header names, rows, and a metadata block."""

    param_names: list[str]
    metric_names: list[str]
    rows: list[tuple]
    metadata: dict[str, str]


# ---------------------------------------------------------------------------
# experiment registry


@dataclass(frozen=True)
class ExperimentDef:
    required: tuple[str, ...]
    sweepable: tuple[str, ...]
    defaults: dict
    metrics: tuple[str, ...]
    runner: object
    description: str


def _battery_spec(params: dict) -> BatterySpec:
    return BatterySpec(
        J=float(params["j"]),
        gamma=float(params.get("gamma", 0.0)),
        delta=float(params.get("delta", 0.0)),
        h=float(params["h"]),
        n_sites=int(round(params["n_sites"])),
        boundary=str(params.get("boundary", "periodic")),
    )


def _pt_pair(params: dict) -> tuple[ChargerSpec, ChargerSpec]:
    n = int(round(params["n_sites"]))
    alpha = float(params["alpha"])
    return (
        ChargerSpec(kind=PT, n_sites=n, alpha=alpha),
        ChargerSpec(kind=PT_HERMITIAN, n_sites=n, alpha=alpha),
    )


def _rt_pair(params: dict) -> tuple[ChargerSpec, ChargerSpec]:
    n = int(round(params["n_sites"]))
    g = float(params["gamma_prime"])
    hp = float(params["h_prime"])
    return (
        ChargerSpec(kind=RT, n_sites=n, gamma_prime=g, J=1.0, h_prime=hp),
        ChargerSpec(kind=RT_HERMITIAN, n_sites=n, gamma_prime=g, J=1.0, h_prime=hp),
    )


def _pt_row(params: dict) -> dict:
    rec = delta_p_max(
        _battery_spec(params),
        *_pt_pair(params),
        init=params.get("init", "ground"),
        beta=params.get("beta"),
        t_max=params["t_max"],
        n_grid=params["n_grid"],
    )
    return {"p_max_pt": rec.p_max_nonhermitian, "p_max_herm": rec.p_max_hermitian}


def _pt_map_row(params: dict) -> dict:
    h = float(params["h"])
    u = float(params["j_rel"])
    j_lo = -2.0 * h + _J_MARGIN
    j_hi = 2.0 * h - _J_MARGIN
    if j_hi <= j_lo:
        raise DegenerateGroundStateError(f"no non-degenerate J interval at h={h}")
    j = j_lo + u * (j_hi - j_lo)
    rec = delta_p_max(
        _battery_spec({**params, "j": j}),
        *_pt_pair(params),
        t_max=params["t_max"],
        n_grid=params["n_grid"],
    )
    return {
        "j": j,
        "p_max_pt": rec.p_max_nonhermitian,
        "p_max_herm": rec.p_max_hermitian,
        "delta_p_max": rec.delta,
    }


def _pt_thermal_row(params: dict) -> dict:
    return _pt_row({**params, "init": "thermal"})


def _pt_scaling_row(params: dict) -> dict:
    rec = delta_p_max(
        _battery_spec(params),
        *_pt_pair(params),
        t_max=params["t_max"],
        n_grid=params["n_grid"],
    )
    return {"p_max_pt": rec.p_max_nonhermitian}


def _rt_row(params: dict) -> dict:
    rec = delta_p_max(
        int(round(params["n_sites"])),
        *_rt_pair(params),
        init=params.get("init", "ground"),
        beta=params.get("beta"),
        t_max=params["t_max"],
        n_grid=params["n_grid"],
    )
    return {"p_max_rt": rec.p_max_nonhermitian, "p_max_herm": rec.p_max_hermitian}


def _rt_map_row(params: dict) -> dict:
    out = _rt_row(params)
    out["delta_p_max"] = out["p_max_rt"] - out["p_max_herm"]
    return out


def _rt_thermal_row(params: dict) -> dict:
    return _rt_row({**params, "init": "thermal"})


def _ergotropy_trace(config: SweepConfig) -> SweepResult:
    """Time traces of work and ergotropy for one PT and one RT configuration."""
    params = _merged_fixed(config)
    start, stop, count = config.ranges["t"]
    times = _grid_values(start, stop, count)
    n = int(round(params["n_sites"]))

    battery_pt = normalize_spectrum(build_battery_xyz(_battery_spec(params)))
    psi_pt = ground_state(battery_pt)
    charger_pt = build_pt_charger(float(params["alpha"]), n)

    battery_rt = normalize_spectrum(build_noninteracting_battery(n))
    psi_rt = ground_state(battery_rt)
    charger_rt = build_rt_charger(
        ChargerSpec(
            kind=RT,
            n_sites=n,
            gamma_prime=float(params["gamma_prime"]),
            J=1.0,
            h_prime=float(params["h_prime"]),
        )
    )

    rows = []
    for t in times:
        if t <= 0:
            raise ValueError("fig_ergotropy needs t > 0")
        state_pt = evolve_normalized(charger_pt, psi_pt, t)
        state_rt = evolve_normalized(charger_rt, psi_rt, t)
        rows.append(
            (
                t,
                work(battery_pt, psi_pt, state_pt),
                ergotropy(battery_pt, state_pt),
                work(battery_rt, psi_rt, state_rt),
                ergotropy(battery_rt, state_rt),
            )
        )
    return SweepResult(
        param_names=["t"],
        metric_names=list(EXPERIMENTS["fig_ergotropy"].metrics),
        rows=rows,
        metadata={},
    )


_PT_BATTERY_DEFAULTS = {
    "j": 1.0,
    "h": 1.0,
    "gamma": 0.0,
    "delta": 0.0,
    "n_sites": 6,
    "boundary": "open",
    "alpha": math.pi / 3.0,
}

EXPERIMENTS: dict[str, ExperimentDef] = {
    "fig_ergotropy": ExperimentDef(
        required=("t",),
        sweepable=("t",),
        defaults={
            **_PT_BATTERY_DEFAULTS,
            "alpha": 2.0 * math.pi / 3.0,
            "gamma_prime": 0.1,
            "h_prime": 1.5,
        },
        metrics=("work_pt", "ergotropy_pt", "work_rt", "ergotropy_rt"),
        runner=None,  # dedicated trace pipeline
        description="work and ergotropy vs time for a PT and an RT configuration",
    ),
    "fig_pt_map": ExperimentDef(
        required=("h", "j_rel"),
        sweepable=("h", "j_rel", "alpha"),
        defaults={"alpha": math.pi / 3.0, "n_sites": 2, "gamma": 0.0, "delta": 0.0, "boundary": "periodic"},
        metrics=("j", "p_max_pt", "p_max_herm", "delta_p_max"),
        runner=_pt_map_row,
        description="P_max difference map over the battery (h, J) plane, PT vs Hermitian charger",
    ),
    "fig_pmax_vs_alpha": ExperimentDef(
        required=("alpha",),
        sweepable=("alpha", "n_sites"),
        defaults=_PT_BATTERY_DEFAULTS,
        metrics=("p_max_pt", "p_max_herm"),
        runner=_pt_row,
        description="P_max vs the non-Hermiticity angle of the local charger",
    ),
    "fig_pmax_vs_J": ExperimentDef(
        required=("j",),
        sweepable=("j", "alpha"),
        defaults=_PT_BATTERY_DEFAULTS,
        metrics=("p_max_pt", "p_max_herm"),
        runner=_pt_row,
        description="P_max vs the battery xy coupling",
    ),
    "fig_scaling_N": ExperimentDef(
        required=("n_sites",),
        sweepable=("n_sites",),
        defaults={**_PT_BATTERY_DEFAULTS, "alpha": math.pi / 2.0},
        metrics=("p_max_pt",),
        runner=_pt_scaling_row,
        description="P_max vs chain length with a power-law fit in the metadata",
    ),
    "fig_pmax_vs_gamma": ExperimentDef(
        required=("gamma",),
        sweepable=("gamma", "alpha"),
        defaults=_PT_BATTERY_DEFAULTS,
        metrics=("p_max_pt", "p_max_herm"),
        runner=_pt_row,
        description="P_max vs battery anisotropy",
    ),
    "fig_pmax_vs_delta": ExperimentDef(
        required=("delta",),
        sweepable=("delta", "alpha"),
        defaults=_PT_BATTERY_DEFAULTS,
        metrics=("p_max_pt", "p_max_herm"),
        runner=_pt_row,
        description="P_max vs battery zz coupling",
    ),
    "fig_thermal_pt": ExperimentDef(
        required=("beta",),
        sweepable=("beta", "alpha"),
        defaults={**_PT_BATTERY_DEFAULTS, "n_sites": 2, "boundary": "periodic"},
        metrics=("p_max_pt", "p_max_herm"),
        runner=_pt_thermal_row,
        description="P_max vs inverse temperature of the thermal initial state (PT side)",
    ),
    "fig_rt_map": ExperimentDef(
        required=("gamma_prime", "h_prime"),
        sweepable=("gamma_prime", "h_prime"),
        defaults={"n_sites": 2},
        metrics=("p_max_rt", "p_max_herm", "delta_p_max"),
        runner=_rt_map_row,
        description="P_max difference map over the charger (gamma', h') plane, RT vs Hermitian",
    ),
    "fig_rt_vs_gammaprime": ExperimentDef(
        required=("gamma_prime",),
        sweepable=("gamma_prime", "h_prime"),
        defaults={"n_sites": 6, "h_prime": 0.5},
        metrics=("p_max_rt", "p_max_herm"),
        runner=_rt_row,
        description="P_max vs the imaginary anisotropy of the RT charger",
    ),
    "fig_rt_scaling_N": ExperimentDef(
        required=("n_sites",),
        sweepable=("n_sites", "h_prime"),
        defaults={"gamma_prime": 0.8, "h_prime": 0.5},
        metrics=("p_max_rt", "p_max_herm"),
        runner=_rt_row,
        description="P_max vs chain length for the RT charger",
    ),
    "fig_thermal_rt": ExperimentDef(
        required=("beta",),
        sweepable=("beta", "gamma_prime"),
        defaults={"gamma_prime": 0.8, "h_prime": 0.5, "n_sites": 4},
        metrics=("p_max_rt", "p_max_herm"),
        runner=_rt_thermal_row,
        description="P_max vs inverse temperature of the thermal initial state (RT side)",
    ),
}


# ---------------------------------------------------------------------------
# sweep engine


def _grid_values(start: float, stop: float, count: int) -> list[float]:
    if count == 1:
        return [float(start)]
    return [float(v) for v in np.linspace(start, stop, count)]


def _merged_fixed(config: SweepConfig) -> dict:
    spec = EXPERIMENTS[config.experiment]
    params = dict(spec.defaults)
    params.update(config.fixed)
    params["t_max"] = config.t_max
    params["n_grid"] = config.n_grid
    return params


def _compute_row(payload) -> tuple:
    experiment, params = payload
    runner = EXPERIMENTS[experiment].runner
    metrics = EXPERIMENTS[experiment].metrics
    try:
        out = runner(params)
    except DegenerateGroundStateError:
        return tuple(None for _ in metrics)
    except QBatteryError as exc:
        point = {k: v for k, v in params.items() if k not in ("t_max", "n_grid")}
        raise RuntimeError(f"sweep aborted at {point}: {exc}") from exc
    return tuple(out[name] for name in metrics)


def run_experiment(config: SweepConfig) -> SweepResult:
    """Run one sweep: cartesian product of the declared ranges, dispatched to
    workers, rows in lexicographic declaration order."""
    config.validate()
    t0 = time.monotonic()
    if config.experiment == "fig_ergotropy":
        result = _ergotropy_trace(config)
    else:
        names = list(config.ranges.keys())
        grids = [_grid_values(*config.ranges[name]) for name in names]
        base = _merged_fixed(config)
        payloads = []
        values_list = list(product(*grids))
        for values in values_list:
            params = dict(base)
            params.update(dict(zip(names, values)))
            payloads.append((config.experiment, params))
        workers = config.workers if config.workers > 0 else (os.cpu_count() or 1)
        if workers == 1 or len(payloads) <= 1:
            metric_rows = [_compute_row(p) for p in payloads]
        else:
            chunksize = max(1, len(payloads) // (4 * workers))
            with ProcessPoolExecutor(max_workers=workers) as pool:
                metric_rows = list(pool.map(_compute_row, payloads, chunksize=chunksize))
        rows = [tuple(values) + m for values, m in zip(values_list, metric_rows)]
        result = SweepResult(
            param_names=names,
            metric_names=list(EXPERIMENTS[config.experiment].metrics),
            rows=rows,
            metadata={},
        )
    for row in result.rows:
        for v in row:
            if v is not None and not math.isfinite(v):
                raise RuntimeError(f"non-finite value in sweep row {row}")
    meta = {"experiment": config.experiment, "version": __version__}
    for name, (start, stop, count) in config.ranges.items():
        meta[f"range_{name}"] = f"{start:.17g}:{stop:.17g}:{count}"
    for key in sorted(config.fixed):
        meta[f"fixed_{key}"] = str(config.fixed[key])
    meta["t_max"] = f"{config.t_max:.17g}"
    meta["n_grid"] = str(config.n_grid)
    if config.experiment == "fig_scaling_N":
        ok = [
            (p, m)
            for p, m in zip((r[0] for r in result.rows), (r[-1] for r in result.rows))
            if m is not None and m > 0
        ]
        if len(ok) >= 3:
            fit = fit_power_law([int(round(p)) for p, _ in ok], [m for _, m in ok])
            meta["fit_coefficient"] = f"{fit['coefficient']:.17g}"
            meta["fit_exponent"] = f"{fit['exponent']:.17g}"
            meta["fit_residual"] = f"{fit['residual']:.17g}"
    meta["wall_time_s"] = f"{time.monotonic() - t0:.3f}"
    result.metadata = {**meta, **result.metadata}
    return result


def fit_power_law(n_values, p_max_values) -> dict:
    """Least-squares fit of log(P) = log c + p log N; returns c, p and the
    RMS residual in log space."""
    n_arr = np.asarray(n_values, dtype=float)
    p_arr = np.asarray(p_max_values, dtype=float)
    if n_arr.size < 3:
        raise ValueError("power-law fit needs at least 3 points")
    if np.any(n_arr <= 0) or np.any(p_arr <= 0):
        raise ValueError("power-law fit needs positive inputs")
    x = np.log(n_arr)
    y = np.log(p_arr)
    xm = x.mean()
    ym = y.mean()
    denom = float(np.sum((x - xm) ** 2))
    if denom == 0.0:
        raise ValueError("power-law fit needs at least two distinct N values")
    slope = float(np.sum((x - xm) * (y - ym)) / denom)
    intercept = ym - slope * xm
    resid = y - (intercept + slope * x)
    return {
        "coefficient": math.exp(intercept),
        "exponent": slope,
        "residual": float(np.sqrt(np.mean(resid**2))),
    }


# ---------------------------------------------------------------------------
# CSV + plot output


def _csv_field(text: str) -> str:
    if any(ch in text for ch in ',"\n\r'):
        return '"' + text.replace('"', '""') + '"'
    return text


def _format_value(v) -> str:
    if v is None:
        return DEGEN_MARKER
    return f"{float(v):.17g}"


def emit_outputs(result: SweepResult, path: str, plot: bool = False) -> None:
    """Write the sweep as CSV ('#' metadata lines, then header, then rows);
    optionally write a sibling matplotlib script referencing the CSV."""
    directory = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(directory, exist_ok=True)
        lines = [f"# {key}: {value}" for key, value in result.metadata.items()]
        header = [_csv_field(name) for name in result.param_names + result.metric_names]
        lines.append(",".join(header))
        for row in result.rows:
            lines.append(",".join(_csv_field(_format_value(v)) for v in row))
        with open(path, "w", newline="") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise RuntimeError(f"failed to write results to {path}: {exc}") from exc
    if plot:
        script_path = os.path.splitext(path)[0] + "_plot.py"
        try:
            with open(script_path, "w") as fh:
                fh.write(_plot_script(result, os.path.basename(path)))
        except OSError as exc:
            raise RuntimeError(f"failed to write plot script to {script_path}: {exc}") from exc


def read_csv(path: str):
    """Parse a sweep CSV back into (metadata, names, rows of strings)."""
    metadata: dict[str, str] = {}
    names: list[str] = []
    rows: list[list[str]] = []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if ":" in body:
                    key, _, value = body.partition(":")
                    metadata[key.strip()] = value.strip()
                continue
            fields = _split_csv_line(line)
            if not names:
                names = fields
            else:
                rows.append(fields)
    return metadata, names, rows


def _split_csv_line(line: str) -> list[str]:
    fields = []
    buf = []
    quoted = False
    i = 0
    while i < len(line):
        ch = line[i]
        if quoted:
            if ch == '"':
                if i + 1 < len(line) and line[i + 1] == '"':
                    buf.append('"')
                    i += 1
                else:
                    quoted = False
            else:
                buf.append(ch)
        elif ch == '"':
            quoted = True
        elif ch == ",":
            fields.append("".join(buf))
            buf = []
        else:
            buf.append(ch)
        i += 1
    fields.append("".join(buf))
    return fields


def _plot_script(result: SweepResult, csv_name: str) -> str:
    n_params = len(result.param_names)
    range_names = [k[6:] for k in result.metadata if k.startswith("range_")]
    counts = [
        int(result.metadata[f"range_{name}"].rsplit(":", 1)[1]) for name in range_names
    ]
    png_name = os.path.splitext(csv_name)[0] + ".png"
    lines = [
        "import csv",
        "",
        "import matplotlib",
        'matplotlib.use("Agg")',
        "import matplotlib.pyplot as plt",
        "import numpy as np",
        "",
        f"CSV = {csv_name!r}",
        "rows = []",
        "with open(CSV) as fh:",
        '    reader = csv.reader(line for line in fh if not line.startswith("#"))',
        "    header = next(reader)",
        "    for row in reader:",
        '        rows.append([np.nan if v == "DEGEN" else float(v) for v in row])',
        "data = np.array(rows)",
    ]
    if len(counts) == 2 and len(result.rows) == counts[0] * counts[1]:
        lines += [
            f"nx, ny = {counts[0]}, {counts[1]}",
            "x = data[:, 0].reshape(nx, ny)",
            "y = data[:, 1].reshape(nx, ny)",
            "z = data[:, -1].reshape(nx, ny)",
            "plt.pcolormesh(x, y, z, shading='nearest', cmap='RdBu_r')",
            "plt.colorbar(label=header[-1])",
            "plt.xlabel(header[0]); plt.ylabel(header[1])",
        ]
    else:
        lines += [
            "x = data[:, 0]",
            f"for k in range({n_params}, data.shape[1]):",
            '    plt.plot(x, data[:, k], marker=".", label=header[k])',
            "plt.xlabel(header[0]); plt.legend()",
        ]
    lines += [
        "plt.tight_layout()",
        f"plt.savefig({png_name!r}, dpi=160)",
        f"print('wrote', {png_name!r})",
        "",
    ]
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# config file parsing


def _parse_number(text: str) -> float:
    """Evaluate a numeric config value; bare arithmetic on literals and 'pi'."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and isinstance(
            node.op, (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)
        ):
            a = ev(node.left)
            b = ev(node.right)
            ops = {
                ast.Add: lambda: a + b,
                ast.Sub: lambda: a - b,
                ast.Mult: lambda: a * b,
                ast.Div: lambda: a / b,
                ast.Pow: lambda: a**b,
            }
            return ops[type(node.op)]()
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.UAdd, ast.USub)):
            v = ev(node.operand)
            return v if isinstance(node.op, ast.UAdd) else -v
        raise ValueError(f"unsupported expression {text!r}")

    try:
        return float(ev(ast.parse(text, mode="eval")))
    except (SyntaxError, ZeroDivisionError) as exc:
        raise ValueError(f"cannot parse number {text!r}") from exc


_STRING_KEYS = {"experiment", "output", "boundary"}
_INT_KEYS = {"n_grid", "workers"}


def parse_config_text(text: str) -> SweepConfig:
    experiment = ""
    ranges: dict[str, tuple[float, float, int]] = {}
    fixed: dict[str, object] = {}
    options: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().lower()
        value = value.strip()
        if not value:
            raise ValueError(f"line {lineno}: empty value for {key!r}")
        if key == "experiment":
            experiment = value
        elif key == "output":
            options["output_path"] = value
        elif key in _INT_KEYS:
            options[key] = int(value)
        elif key == "t_max":
            options["t_max"] = _parse_number(value)
        elif key == "boundary":
            fixed["boundary"] = value
        elif ":" in value:
            parts = [p.strip() for p in value.split(":")]
            if len(parts) != 3:
                raise ValueError(f"line {lineno}: range must be start : stop : count")
            ranges[key] = (_parse_number(parts[0]), _parse_number(parts[1]), int(parts[2]))
        else:
            fixed[key] = _parse_number(value)
    if not experiment:
        raise ValueError("config must set 'experiment'")
    config = SweepConfig(experiment=experiment, ranges=ranges, fixed=fixed, **options)
    return config


def load_config(path: str) -> SweepConfig:
    with open(path) as fh:
        return parse_config_text(fh.read())


# ---------------------------------------------------------------------------
# oracle equivalence suite


def _oracle_checks() -> list[tuple[str, float, float, bool]]:
    """(name, max_error, tolerance, passed) for every closed-form expression."""
    checks = []
    times = np.linspace(0.01, 10.0, 400)

    battery = normalize_spectrum(
        build_battery_xyz(BatterySpec(J=1.0, gamma=0.0, delta=0.0, h=1.0, n_sites=2))
    )
    psi0 = ground_state(battery)
    for alpha in (math.pi / 6.0, math.pi / 3.0, 5.0 * math.pi / 12.0):
        charger = build_pt_charger(alpha, 2)
        herm = build_pt_hermitian_charger(alpha, 2)
        err_p = err_h = err_s = 0.0
        for t in times:
            state = evolve_normalized(charger, psi0, float(t))
            p_num = work(battery, psi0, state) / float(t)
            err_p = max(err_p, abs(p_num - oracles.pt_power_n2(float(t), 1.0, 1.0, alpha)))
            state_h = evolve_normalized(herm, psi0, float(t))
            p_num_h = work(battery, psi0, state_h) / float(t)
            err_h = max(err_h, abs(p_num_h - oracles.pt_herm_power_n2(float(t), 1.0, 1.0, alpha)))
            try:
                ora = oracles.pt_state_n2(alpha, float(t))
            except OracleDomainError:
                continue
            err_s = max(err_s, abs(1.0 - abs(np.vdot(ora, state.data))))
        checks.append((f"{oracles.BRANCH_PT_POWER} alpha={alpha:.4f}", err_p, 1e-8, err_p <= 1e-8))
        checks.append((f"{oracles.BRANCH_PT_HERM_POWER} alpha={alpha:.4f}", err_h, 1e-8, err_h <= 1e-8))
        checks.append((f"{oracles.BRANCH_PT_STATE} alpha={alpha:.4f}", err_s, 1e-8, err_s <= 1e-8))

    battery_rt = normalize_spectrum(build_noninteracting_battery(2))
    psi_rt = ground_state(battery_rt)
    for g, h in ((0.3, 0.5), (0.8, 0.5), (0.8, 0.2), (1.2, 0.5)):
        charger = build_rt_charger(ChargerSpec(kind=RT, n_sites=2, gamma_prime=g, J=1.0, h_prime=h))
        herm = build_rt_charger(
            ChargerSpec(kind=RT_HERMITIAN, n_sites=2, gamma_prime=g, J=1.0, h_prime=h)
        )
        err_p = err_h = err_s = 0.0
        for t in times:
            state = evolve_normalized(charger, psi_rt, float(t))
            p_num = work(battery_rt, psi_rt, state) / float(t)
            err_p = max(err_p, abs(p_num - oracles.rt_power_n2(float(t), g, h)))
            state_h = evolve_normalized(herm, psi_rt, float(t))
            p_num_h = work(battery_rt, psi_rt, state_h) / float(t)
            err_h = max(err_h, abs(p_num_h - oracles.rt_herm_power_n2(float(t), g, h)))
            err_s = max(
                err_s, abs(1.0 - abs(np.vdot(oracles.rt_state_n2(g, h, float(t)), state.data)))
            )
        branch = oracles.rt_power_branch(g, h)
        checks.append((f"{branch} g'={g} h={h}", err_p, 1e-8, err_p <= 1e-8))
        checks.append((f"{oracles.BRANCH_RT_HERM_POWER} g'={g} h={h}", err_h, 1e-8, err_h <= 1e-8))
        checks.append((f"{oracles.BRANCH_RT_STATE} g'={g} h={h}", err_s, 1e-8, err_s <= 1e-8))
    return checks


def run_oracle_check(stream=None) -> bool:
    stream = stream or sys.stdout
    all_ok = True
    for name, err, tol, ok in _oracle_checks():
        all_ok = all_ok and bool(ok)
        status = "PASS" if ok else "FAIL"
        stream.write(f"{status} {name}: max_err={err:.3e} (tol {tol:g})\n")
    return all_ok


# ---------------------------------------------------------------------------
# CLI


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qbattery",
        description="Quantum battery sweeps with non-Hermitian charging",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a sweep from a config file")
    run_p.add_argument("config", help="path to a key = value config file")
    run_p.add_argument("--workers", type=int, default=None, help="worker processes (default: available parallelism)")
    run_p.add_argument("--t-max", type=float, default=None, help="override the time window")
    run_p.add_argument("--n-grid", type=int, default=None, help="override the time-grid size")
    run_p.add_argument("--out", default=None, help="override the output CSV path")
    run_p.add_argument("--plot", action="store_true", help="also write a plotting script")

    sub.add_parser("oracle-check", help="run the closed-form vs numeric equivalence suite")
    sub.add_parser("list-experiments", help="list available experiments")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "list-experiments":
        for name, spec in EXPERIMENTS.items():
            print(f"{name}: {spec.description}")
            print(f"    required: {', '.join(spec.required)}")
            if spec.defaults:
                defaults = ", ".join(f"{k}={v}" for k, v in sorted(spec.defaults.items(), key=lambda kv: kv[0]))
                print(f"    defaults: {defaults}")
            print(f"    metrics:  {', '.join(spec.metrics)}")
        return 0
    if args.command == "oracle-check":
        return 0 if run_oracle_check() else 1
    config = load_config(args.config)
    if args.workers is not None:
        config.workers = args.workers
    if args.t_max is not None:
        config.t_max = args.t_max
    if args.n_grid is not None:
        config.n_grid = args.n_grid
    if args.out is not None:
        config.output_path = args.out
    result = run_experiment(config)
    emit_outputs(result, config.output_path, plot=args.plot)
    print(f"wrote {len(result.rows)} rows to {config.output_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
