"""Run configuration, scenario presets and file output for the command-line driver.

Every number written to disk goes through :func:`fmt` (17 significant
digits, locale-free) and every file is written to a temporary sibling and
renamed into place, so a failed run never leaves a half-written file behind.
"""
from __future__ import annotations

import json
import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .coeffs import CHANNELS, coeff_values, discrepancy_scan
from .dynamics import discrepancy_report, nr_variances, scaling_functions, secular_fit, series
from .fock import FockConfig, commutator_check, richardson, run_exact
from .params import (
    GaussianPacket, OscillatorParams, eta_e, ground_packet, to_natural, validity_guard,
)

SCENARIOS = ("custom", "electron-1keV", "electron-10keV", "natural")
OUT_ENV = "RELOSC_OUT"
DEFAULT_EPS = 1e-3
DEFAULT_SWEEP_ETA = (1e-10, 1e-8, 1e-6, 1e-4, 1e-3, 2e-3, 1e-2, 2e-2)
COMMUTATOR_TIMES = (0.5, 1.0, 2.0, math.pi, 5.0)


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    scenario: str = "natural"
    eps: float = DEFAULT_EPS
    # custom scene (ignored by the presets)
    mass: float = 1.0
    omega: float = 1.0
    hbar: float = 1.0
    c: float = math.inf
    # packet overrides in the scene's units; None means the ground packet's value
    q0: float | None = None
    p0: float | None = None
    sigma_q: float | None = None
    periods: float = 4.0
    points_per_period: int = 200
    coeff_source: str = "oracle"
    fock_dim: int | None = None
    sweep_eta: tuple = DEFAULT_SWEEP_ETA
    workers: int = 1
    out: str = "relosc-out"
    svg: bool = False

    def validate(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; choose from {', '.join(SCENARIOS)}")
        if not (self.periods > 0 and math.isfinite(self.periods)):
            raise ConfigError("periods must be positive")
        if self.points_per_period < 8:
            raise ConfigError("points_per_period must be at least 8")
        if self.coeff_source not in ("oracle", "printed"):
            raise ConfigError("coeff_source must be 'oracle' or 'printed'")
        if self.eps < 0:
            raise ConfigError("eps must be non-negative")
        if self.fock_dim is not None and self.fock_dim <= FockConfig.guard:
            raise ConfigError(f"fock_dim must exceed the guard band ({FockConfig.guard})")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if len(self.sweep_eta) < 2 or any(e < 0 for e in self.sweep_eta):
            raise ConfigError("sweep needs at least two non-negative eta values")
        try:
            self.scene()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return self

    def scene(self):
        """(params, packet) in the scene's own units."""
        if self.scenario == "electron-1keV":
            params = OscillatorParams.electron(1e3)
        elif self.scenario == "electron-10keV":
            params = OscillatorParams.electron(1e4)
        elif self.scenario == "natural":
            params = OscillatorParams.natural(self.eps)
        else:
            params = OscillatorParams(self.mass, self.omega, self.hbar, self.c)
        g = ground_packet(params)
        packet = GaussianPacket(
            g.q0 if self.q0 is None else self.q0,
            g.p0 if self.p0 is None else self.p0,
            g.sigma_q if self.sigma_q is None else self.sigma_q,
        )
        return params, packet

    def natural_scene(self):
        return to_natural(*self.scene())

    def omega_t(self):
        n = int(round(self.periods * self.points_per_period))
        return np.linspace(0.0, 2 * math.pi * self.periods, n + 1)

    def fock_config(self, packet: GaussianPacket):
        if self.fock_dim is not None:
            return FockConfig(self.fock_dim)
        ground = abs(packet.q0) < 1e-300 and abs(packet.p0) < 1e-300 and abs(packet.sigma_q**2 - 0.5) < 1e-12
        return FockConfig(128 if ground else 256)


_FLOAT_KEYS = {"eps", "mass", "omega", "hbar", "c", "q0", "p0", "sigma_q", "periods"}
_INT_KEYS = {"points_per_period", "fock_dim", "workers"}


def _coerce(key, value: str):
    try:
        if key in _FLOAT_KEYS:
            return float(value)
        if key in _INT_KEYS:
            return int(value)
        if key == "svg":
            low = value.strip().lower()
            if low not in ("1", "0", "true", "false", "yes", "no"):
                raise ValueError(value)
            return low in ("1", "true", "yes")
        if key == "sweep_eta":
            return tuple(float(v) for v in value.split(",") if v.strip())
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc
    return value.strip()


def parse_config_text(text: str) -> dict:
    """key = value lines; '#' starts a comment; keys may use '-' or '_'."""
    known = {f.name for f in fields(RunConfig)}
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


def build_config(file_values: dict | None = None, overrides: dict | None = None,
                 environ=None) -> RunConfig:
    """Defaults < config file < output-dir environment override < command line."""
    environ = os.environ if environ is None else environ
    values = dict(file_values or {})
    if environ.get(OUT_ENV):
        values["out"] = environ[OUT_ENV]
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return RunConfig(**values).validate()


# --- formatting and atomic output -------------------------------------------

def fmt(x) -> str:
    if x is None:
        return "nan"
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0:
        return "0"  # no signed zeros in the files
    return format(x, ".17g")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        # JSON has no nan/inf; null keeps the file parseable
        return x if math.isfinite(x) else None
    return obj


def atomic_write(path: Path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(columns, rows, schema_note: str = "") -> str:
    head = "# schema: " + ",".join(columns) + (f" | {schema_note}" if schema_note else "")
    lines = [head, ",".join(columns)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def json_text(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_csv(path, columns, rows, schema_note=""):
    atomic_write(path, csv_text(columns, rows, schema_note))
    return Path(path)


def write_json(path, obj):
    atomic_write(path, json_text(obj))
    return Path(path)


# --- computations ------------------------------------------------------------

def coeff_table(cfg: RunConfig):
    """Printed and oracle channel coefficients in oscillator units."""
    x = cfg.omega_t()
    params = OscillatorParams.natural(0.0)
    printed = coeff_values(x, params, "printed")
    oracle = coeff_values(x, params, "oracle")
    names = [ch.name for ch in CHANNELS]
    columns = (["omega_t"] + [f"{n}_printed" for n in names] + [f"{n}_oracle" for n in names]
               + [f"dev_{n}" for n in names])
    dev = np.abs(printed - oracle)
    rows = np.column_stack([x, printed.T, oracle.T, dev.T])
    return columns, rows


SERIES_COLUMNS = ["t", "omega_t", "sigma_q2_nr", "sigma_p2_nr", "sigma_q2_rel", "sigma_p2_rel",
                  "product_rel", "corr_q2", "corr_p2", "corr_product"]


def evolve_run(cfg: RunConfig):
    """Series in scene units, scaling functions, and the summary dictionary."""
    params, packet = cfg.scene()
    nat, npk, record = cfg.natural_scene()
    x = cfg.omega_t()
    s_nat = series(npk, nat, x, cfg.coeff_source)
    s = s_nat.to_units(record)
    diag = validity_guard(params, packet)
    scale = scaling_functions(x, npk, cfg.coeff_source)
    rel_prod = np.abs(s_nat.corr_product / s_nat.product_nr)
    rel_width = np.abs(s_nat.corr_q2 / s_nat.sigma_q2_nr)
    slope = None
    if cfg.periods >= 10:
        slope = secular_fit(s_nat)[0]
    summary = {
        "scenario": cfg.scenario,
        "coeff_source": cfg.coeff_source,
        "eta_e": eta_e(params),
        "v_rms_over_c": diag.v_rms_over_c,
        "warnings": diag.warnings,
        "periods": cfg.periods,
        "points_per_period": cfg.points_per_period,
        "packet": {"q0": packet.q0, "p0": packet.p0, "sigma_q": packet.sigma_q},
        "max_abs_f1": float(np.max(np.abs(scale.f1))),
        "max_abs_f2": float(np.max(np.abs(scale.f2))),
        "max_rel_product_shift": float(np.max(rel_prod)),
        "max_rel_width_shift": float(np.max(rel_width)),
        "secular_slope_per_period": slope,
    }
    return s, scale, summary, diag


def series_rows(s):
    cols = [s.times, s.omega_t] + [getattr(s, c) for c in s.COLUMNS]
    return np.column_stack(cols)


def compare_run(cfg: RunConfig, sample_count: int = 24):
    """Verbatim-vs-assembled, coefficient, commutator and Richardson diagnostics.

    Returns the JSON-ready document plus the phase grid and the full
    Richardson tables (for plotting).
    """
    nat, npk, record = cfg.natural_scene()
    x = cfg.omega_t()
    # an eps = 0 scene has nothing to extrapolate; fall back to the default step
    eps = record.epsilon or cfg.eps or DEFAULT_EPS
    verb = discrepancy_report(x, npk, OscillatorParams.natural(eps)).as_dict()
    scan = {d.channel.name: d.as_dict() for d in discrepancy_scan(np.linspace(0, 4 * math.pi, 100), nat)}
    comm = []
    for t in COMMUTATOR_TIMES:
        ro = commutator_check(t, FockConfig(64), nat, "oracle")
        rp = commutator_check(t, FockConfig(64), nat, "printed")
        comm.append({"omega_t": t, "oracle_p": ro[0], "oracle_q": ro[1], "printed_p": rp[0], "printed_q": rp[1]})

    fcfg = cfg.fock_config(npk)
    tables = richardson(npk, x, eps, fcfg, cfg.coeff_source)
    idx = np.unique(np.linspace(0, x.size - 1, sample_count).round().astype(int))
    rich = {}
    for tab in tables:
        ratio = tab.ratio
        m = tab.mask
        ok = m & (np.abs(ratio - 0.25) <= 0.05)
        rich[tab.quantity] = {
            "eps": eps,
            "noise": tab.noise,
            "points_tested": int(m.sum()),
            "points_within_tolerance": int(ok.sum()),
            "global_ratio": float(np.max(np.abs(tab.r_half)) / max(np.max(np.abs(tab.r_full)), 1e-300)),
            "samples": [
                {"omega_t": float(x[i]), "ratio": float(ratio[i]) if m[i] else None,
                 "r_full": float(tab.r_full[i])} for i in idx
            ],
        }
    ex0 = run_exact(npk, OscillatorParams.natural(0.0), x, fcfg)
    vq, vp, prod = nr_variances(npk, OscillatorParams.natural(0.0), x)
    nr_sanity = {
        "sigma_q2": float(np.max(np.abs(ex0.var_q - vq))),
        "sigma_p2": float(np.max(np.abs(ex0.var_p - vp))),
        "product": float(np.max(np.abs(ex0.product - prod))),
    }
    doc = {
        "scenario": cfg.scenario,
        "eps": eps,
        "fock_dim": fcfg.dim,
        "verbatim_vs_assembled": verb,
        "coefficients": scan,
        "commutator_residuals": comm,
        "richardson": rich,
        "nr_sanity": nr_sanity,
    }
    return doc, x, tables


SWEEP_COLUMNS = ["index", "eta_e", "max_abs_f1", "max_abs_f2", "max_rel_width_shift",
                 "max_rel_product_shift", "secular_slope_per_period"]


def _sweep_point(args):
    cfg, eta = args
    _, npk, _ = cfg.natural_scene()
    params = OscillatorParams.natural(eta)
    x = cfg.omega_t()
    s = series(npk, params, x, cfg.coeff_source)
    sc = scaling_functions(x, npk, cfg.coeff_source)
    long_x = np.linspace(0.0, 2 * math.pi * max(cfg.periods, 10.0),
                         int(round(max(cfg.periods, 10.0) * cfg.points_per_period)) + 1)
    slope = secular_fit(series(npk, params, long_x, cfg.coeff_source))[0]
    return [
        eta,
        float(np.max(np.abs(sc.f1))),
        float(np.max(np.abs(sc.f2))),
        float(np.max(np.abs(s.corr_q2 / s.sigma_q2_nr))),
        float(np.max(np.abs(s.corr_product / s.product_nr))),
        slope,
    ]


def sweep_run(cfg: RunConfig):
    """One row per eta value; rows keep the sweep order whatever the completion order."""
    jobs = [(cfg, float(e)) for e in cfg.sweep_eta]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        results = list(pool.map(_sweep_point, jobs))
    return [[i] + r for i, r in enumerate(results)]


@dataclass
class ReportBundle:
    series_csv: Path
    scaling_csv: Path
    discrepancy_json: Path
    summary_json: Path
    extra: list = field(default_factory=list)

    def as_dict(self):
        return {
            "series_csv": self.series_csv.name, "scaling_csv": self.scaling_csv.name,
            "discrepancy_json": self.discrepancy_json.name, "summary_json": self.summary_json.name,
            "extra": [p.name for p in self.extra],
        }


def scenario_note(cfg: RunConfig) -> str:
    return f"scenario={cfg.scenario} coeff_source={cfg.coeff_source}"


def with_overrides(cfg: RunConfig, **kw) -> RunConfig:
    return replace(cfg, **kw).validate()


__all__ = [
    "SCENARIOS", "OUT_ENV", "ConfigError", "RunConfig", "ReportBundle", "parse_config_text",
    "build_config", "fmt", "atomic_write", "csv_text", "json_text", "write_csv", "write_json",
    "coeff_table", "evolve_run", "series_rows", "compare_run", "sweep_run", "SERIES_COLUMNS",
    "SWEEP_COLUMNS", "with_overrides",
]
