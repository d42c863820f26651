"""relosc command-line driver.

    relosc coeffs  [--out DIR] [--svg]
    relosc evolve  --scenario electron-1keV --periods 4
    relosc compare --scenario natural --eps 2e-3 --periods 3
    relosc sweep   --sweep-eta 1e-9,1e-6,1e-3 --workers 4
    relosc report  --svg

Exit codes: 0 ok (validity warnings allowed), 2 I/O failure, 3 Fock basis too
small, 4 invalid configuration.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .fock import BasisTooSmallError
from .report import (
    SCENARIOS, SERIES_COLUMNS, SWEEP_COLUMNS, ConfigError, ReportBundle, build_config,
    coeff_table, compare_run, evolve_run, parse_config_text, scenario_note, series_rows,
    sweep_run, write_csv, write_json,
)

log = logging.getLogger("relosc")

EXIT_OK, EXIT_IO, EXIT_BASIS, EXIT_CONFIG = 0, 2, 3, 4
COMMANDS = ("coeffs", "evolve", "compare", "sweep", "report")


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad arguments, which is reserved for I/O failures here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _parser():
    ap = _Parser(prog="relosc", description=__doc__.split("\n\n")[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", type=Path, help="key = value file; command-line flags win")
    ap.add_argument("--out", help="output directory (env RELOSC_OUT also works)")
    ap.add_argument("--scenario", choices=SCENARIOS)
    ap.add_argument("--eps", type=float, help="hbar omega / m c^2 for the natural scenario")
    ap.add_argument("--periods", type=float)
    ap.add_argument("--points-per-period", type=int)
    ap.add_argument("--coeff-source", choices=("oracle", "printed"))
    ap.add_argument("--fock-dim", type=int)
    ap.add_argument("--q0", type=float)
    ap.add_argument("--p0", type=float)
    ap.add_argument("--sigma-q", type=float)
    ap.add_argument("--sweep-eta", help="comma-separated eta values for the sweep")
    ap.add_argument("--workers", type=int)
    ap.add_argument("--svg", action="store_true", default=None, help="also render SVG figures")
    return ap


def _overrides(ns):
    keys = ("out", "scenario", "eps", "periods", "points_per_period", "coeff_source",
            "fock_dim", "q0", "p0", "sigma_q", "workers", "svg")
    out = {k: getattr(ns, k) for k in keys}
    if ns.sweep_eta is not None:
        try:
            out["sweep_eta"] = tuple(float(v) for v in ns.sweep_eta.split(",") if v.strip())
        except ValueError as exc:
            raise ConfigError(f"bad --sweep-eta: {ns.sweep_eta!r}") from exc
    return out


def load_config(ns):
    file_values = {}
    if ns.config is not None:
        file_values = parse_config_text(ns.config.read_text(encoding="utf-8"))
    return build_config(file_values, _overrides(ns))


def run_coeffs(cfg, out: Path):
    columns, rows = coeff_table(cfg)
    paths = [write_csv(out / "coeffs.csv", columns, rows, "oscillator units (hbar = m = omega = 1)")]
    if cfg.svg:
        from . import plots
        paths.append(plots.plot_coeffs(columns, rows, out / "coeffs.svg"))
    return paths


def run_evolve(cfg, out: Path):
    s, scale, summary, diag = evolve_run(cfg)
    for w in diag.warnings:
        log.warning(w)
    series_csv = write_csv(out / "series.csv", SERIES_COLUMNS, series_rows(s), scenario_note(cfg))
    scaling_csv = write_csv(out / "scaling.csv", ["omega_t", "f1", "f2"],
                            zip(scale.omega_t, scale.f1, scale.f2), scenario_note(cfg))
    summary_json = write_json(out / "summary.json", summary)
    paths = [series_csv, scaling_csv, summary_json]
    if cfg.svg:
        from . import plots
        paths.append(plots.plot_series(s, out / "series.svg"))
        paths.append(plots.plot_scaling(scale, out / "scaling.svg"))
    return paths


def run_compare(cfg, out: Path):
    doc, x, tables = compare_run(cfg)
    paths = [write_json(out / "discrepancy.json", doc)]
    if cfg.svg:
        from . import plots
        paths.append(plots.plot_richardson(x, tables, out / "richardson.svg"))
    return paths


def run_sweep(cfg, out: Path):
    rows = sweep_run(cfg)
    paths = [write_csv(out / "sweep.csv", SWEEP_COLUMNS, rows, scenario_note(cfg))]
    if cfg.svg:
        from . import plots
        paths.append(plots.plot_sweep(rows, out / "sweep.svg"))
    return paths


def run_report(cfg, out: Path):
    extra = run_coeffs(cfg, out)
    ev = run_evolve(cfg, out)
    cmp_ = run_compare(cfg, out)
    sw = run_sweep(cfg, out)
    bundle = ReportBundle(ev[0], ev[1], cmp_[0], ev[2], extra + ev[3:] + cmp_[1:] + sw)
    return [write_json(out / "bundle.json", bundle.as_dict())] + extra + ev + cmp_ + sw


RUNNERS = {"coeffs": run_coeffs, "evolve": run_evolve, "compare": run_compare,
           "sweep": run_sweep, "report": run_report}


def main(argv=None) -> int:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    log.handlers[:] = [handler]
    log.setLevel(logging.INFO)
    log.propagate = False
    ns = _parser().parse_args(argv)
    try:
        cfg = load_config(ns)
    except ConfigError as exc:
        log.error("invalid configuration: %s", exc)
        return EXIT_CONFIG
    except OSError as exc:
        log.error("cannot read config: %s", exc)
        return EXIT_IO
    try:
        paths = RUNNERS[ns.command](cfg, Path(cfg.out))
    except BasisTooSmallError as exc:
        log.error("%s", exc)
        return EXIT_BASIS
    except OSError as exc:
        log.error("I/O failure: %s", exc)
        return EXIT_IO
    for p in paths:
        print(p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
