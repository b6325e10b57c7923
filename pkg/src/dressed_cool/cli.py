"""Command-line interface and CSV serialization.

Subcommands: rates, evolve, steady, sweep, fit, spectrum, verify.
Exit codes: 0 success, 1 validation error (bad arguments, config, or input
files), 2 numerical failure (stiff integration, degenerate steady states,
failed fits or acceptance checks).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from . import analysis, config, dynamics, model, rates, sweep
from .integrate import StiffnessError
from .operators import HilbertSpace

TWO_PI = 2.0 * math.pi

CSV_COLUMNS = ("p_d_db", "delta_q_mhz", "n_bar", "sx", "sy", "sz", "s_theta", "gamma_fit", "converged")

_NUMERICAL_ERRORS = (
    StiffnessError,
    dynamics.MultipleSteadyStatesError,
    analysis.FitError,
    analysis.NoSpectralPeakError,
)


class _UsageError(Exception):
    def __init__(self, parser: argparse.ArgumentParser, message: str):
        super().__init__(message)
        self.parser = parser


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage errors through our exit-code scheme."""

    def error(self, message):
        raise _UsageError(self, message)


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.9g}"
    return str(x)


def _metadata_lines(metadata: dict, no_timestamp: bool) -> list[str]:
    lines = [f"# dressed-cool {__version__}"]
    for key, value in metadata.items():
        lines.append(f"# {key}={_fmt(value)}")
    if not no_timestamp:
        stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
        lines.append(f"# written={stamp}")
    return lines


def write_csv(table: sweep.SweepTable, path: str, no_timestamp: bool = False) -> None:
    """Serialize a sweep table: '#' metadata lines, a fixed header, then one
    row per grid point with floats at 9 significant digits, LF line endings."""
    lines = _metadata_lines(table.metadata, no_timestamp)
    lines.append(",".join(CSV_COLUMNS))
    for r in table.rows:
        lines.append(",".join([
            _fmt(r.p_d_db),
            _fmt(r.delta_q / TWO_PI),
            _fmt(r.n_bar),
            _fmt(r.sx),
            _fmt(r.sy),
            _fmt(r.sz),
            _fmt(r.s_theta),
            _fmt(r.gamma_fit),
            _fmt(r.converged),
        ]))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_metadata_value(raw: str):
    try:
        return float(raw)
    except ValueError:
        return raw


def _read_table(path: str) -> tuple[dict, list[str], list[list[str]]]:
    metadata: dict = {}
    header: list[str] | None = None
    rows: list[list[str]] = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, value = body.partition("=")
                    metadata[key.strip()] = _parse_metadata_value(value.strip())
                continue
            if header is None:
                header = [c.strip() for c in line.split(",")]
                continue
            rows.append([c.strip() for c in line.split(",")])
    if header is None:
        raise ValueError(f"{path}: no header row found")
    return metadata, header, rows


def read_csv(path: str) -> sweep.SweepTable:
    """Read a sweep table written by write_csv."""
    metadata, header, raw_rows = _read_table(path)
    if tuple(header) != CSV_COLUMNS:
        raise ValueError(f"{path}: unexpected columns {header}")
    kappa = TWO_PI * metadata.get("kappa_mhz", math.nan)
    delta_c = TWO_PI * metadata.get("delta_c_mhz", math.nan)
    rows = []
    for cells in raw_rows:
        vals = dict(zip(header, cells))
        n_bar = float(vals["n_bar"])
        eps_d = (
            model.drive_for_photons(n_bar, delta_c, kappa)
            if math.isfinite(kappa) and kappa > 0 and math.isfinite(delta_c)
            else math.nan
        )
        rows.append(sweep.SweepRow(
            p_d_db=float(vals["p_d_db"]),
            delta_q=TWO_PI * float(vals["delta_q_mhz"]),
            n_bar=n_bar,
            eps_d=eps_d,
            sx=float(vals["sx"]),
            sy=float(vals["sy"]),
            sz=float(vals["sz"]),
            s_theta=float(vals["s_theta"]),
            gamma_fit=float(vals["gamma_fit"]),
            converged=vals["converged"].lower() in ("true", "1"),
        ))
    return sweep.SweepTable(rows=rows, metadata=metadata)


def write_trajectory_csv(
    times: np.ndarray,
    columns: dict[str, np.ndarray],
    metadata: dict,
    path: str,
    no_timestamp: bool = False,
) -> None:
    lines = _metadata_lines(metadata, no_timestamp)
    names = ["t_us", *columns.keys()]
    lines.append(",".join(names))
    for i, t in enumerate(times):
        lines.append(",".join([_fmt(float(t))] + [_fmt(float(columns[n][i].real)) for n in columns]))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_trajectory_csv(path: str) -> tuple[dict, dict[str, np.ndarray]]:
    metadata, header, raw_rows = _read_table(path)
    data = np.array([[float(c) for c in row] for row in raw_rows], dtype=float)
    if data.size == 0:
        raise ValueError(f"{path}: no data rows")
    return metadata, {name: data[:, j] for j, name in enumerate(header)}


def _load_config(args) -> config.Config:
    if getattr(args, "config", None):
        with open(args.config) as fh:
            return config.parse_config(fh.read())
    return config.Config()


def _emit(text: str, args) -> None:
    out = getattr(args, "output", None)
    if out:
        with open(out, "w", newline="\n") as fh:
            fh.write(text + "\n")
    else:
        print(text)


# ---------------------------------------------------------------- subcommands

def _cmd_rates(args) -> int:
    cfg = _load_config(args)
    p = config.to_system_params(cfg)
    pair = rates.rates_resonant(p) if p.delta_q_prime == 0 else rates.rates_general(p)
    theta = math.atan2(p.omega_r_rabi, p.delta_q_prime)
    omega_tilde = math.hypot(p.omega_r_rabi, p.delta_q_prime)
    pred = rates.steady_bloch(pair, theta, omega_tilde)
    t_eff = rates.effective_temperature(pred.purity_plus, omega_tilde)
    ratio, ok = rates.cooling_condition(p)
    lines = [
        f"n_bar = {_fmt(model.n_bar_of(p))}",
        f"regime = {pair.regime}",
        f"gamma_minus_per_us = {_fmt(pair.gamma_minus)}",
        f"gamma_plus_per_us = {_fmt(pair.gamma_plus)}",
        f"gamma_total_per_us = {_fmt(pair.total)}",
        f"sigma_theta_ss = {_fmt(pred.sigma_theta_ss)}",
        f"purity_plus = {_fmt(pred.purity_plus)}",
        f"theta_deg = {_fmt(math.degrees(theta))}",
        f"omega_tilde_mhz = {_fmt(omega_tilde / TWO_PI)}",
        f"t_eff_uk = {_fmt(t_eff * 1e6)}" + (" (inverted)" if t_eff < 0 else ""),
        f"cooling_ratio = {_fmt(ratio)}" + ("" if ok else " (below threshold)"),
    ]
    _emit("\n".join(lines), args)
    return 0


def _config_metadata(cfg: config.Config) -> dict:
    p = config.to_system_params(cfg)
    return {
        "frame": cfg.frame,
        "chi_mhz": cfg.chi_mhz,
        "kappa_mhz": cfg.kappa_mhz,
        "omega_r_mhz": cfg.omega_r_mhz,
        "delta_c_mhz": cfg.delta_c_mhz,
        "delta_q_prime_mhz": cfg.delta_q_prime_mhz,
        "n_bar": model.n_bar_of(p),
        "n_fock": p.n_fock,
        "gamma_down_per_us": p.gamma_down,
        "gamma_up_per_us": p.gamma_up,
        "gamma_phi_per_us": p.gamma_phi,
    }


def _cmd_evolve(args) -> int:
    cfg = _load_config(args)
    p = config.to_system_params(cfg)
    if cfg.frame == "displaced":
        h = model.build_hamiltonian_displaced(p)
    else:
        h = model.build_hamiltonian_undisplaced(p)
    ls = model.collapse_ops(p, frame=cfg.frame)
    if cfg.initial_state == "turn_on":
        rho0 = model.turn_on_state(p, frame=cfg.frame)
    else:
        rho0 = model.qubit_axis_state(p, cfg.initial_state)

    if cfg.t_max_us is not None:
        t_max = cfg.t_max_us
    else:
        pair = rates.rates_resonant(p) if p.delta_q_prime == 0 else rates.rates_general(p)
        t_max = 10.0 / pair.total
    hs = HilbertSpace(p.n_fock)
    a = hs.a
    obs = {"sx": hs.sx, "sy": hs.sy, "sz": hs.sz, "n_cav": a.conj().T @ a}
    t_grid = np.linspace(0.0, t_max, cfg.n_times)
    traj = dynamics.evolve(h, ls, rho0, t_grid, rtol=cfg.rtol, atol=cfg.atol, observables=obs)

    out = args.output or "trajectory.csv"
    write_trajectory_csv(traj.times, traj.expectations, _config_metadata(cfg), out,
                         no_timestamp=args.no_timestamp)
    print(f"wrote {len(traj.times)} samples over {t_max:.6g} us to {out}")
    return 0


def _cmd_steady(args) -> int:
    cfg = _load_config(args)
    p = config.to_system_params(cfg)
    if cfg.frame == "displaced":
        h = model.build_hamiltonian_displaced(p)
    else:
        h = model.build_hamiltonian_undisplaced(p)
    rho = dynamics.steady_state(h, model.collapse_ops(p, frame=cfg.frame))
    v = analysis.bloch_vector(rho)
    theta = math.radians(cfg.theta_deg)
    s = cfg.tomography_scale
    payload = {
        "n_bar": model.n_bar_of(p),
        "sx": v.x * s,
        "sy": v.y * s,
        "sz": v.z * s,
        "theta_deg": cfg.theta_deg,
        "s_theta": analysis.sigma_theta_projection(v, theta) * s,
        "tomography_scale": s,
    }
    _emit(json.dumps(payload, indent=2), args)
    return 0


def _cmd_sweep(args) -> int:
    cfg = _load_config(args)
    p = config.to_system_params(cfg)
    grid = sweep.SweepGrid(
        power_db=np.linspace(cfg.power_db_min, cfg.power_db_max, cfg.power_points),
        detuning=TWO_PI * np.linspace(cfg.detuning_mhz_min, cfg.detuning_mhz_max, cfg.detuning_points),
        fixed=p,
        mode=cfg.mode,
        theta=math.radians(cfg.theta_deg),
        auto_n_fock=cfg.n_fock is None,
    )
    table = sweep.run_sweep(grid, workers=cfg.workers or None)
    if cfg.tomography_scale != 1.0:
        table = sweep.apply_tomography_scale(table, cfg.tomography_scale)
    out = args.output or "sweep.csv"
    write_csv(table, out, no_timestamp=args.no_timestamp)
    bad = sum(1 for r in table.rows if not r.converged)
    note = f" ({bad} points failed)" if bad else ""
    print(f"wrote {len(table.rows)} rows to {out}{note}")
    return 0


def _cmd_fit(args) -> int:
    _, cols = read_trajectory_csv(args.input)
    if args.column not in cols:
        raise ValueError(f"{args.input}: no column {args.column!r}")
    fit = analysis.fit_exponential(cols["t_us"], cols[args.column])
    _emit(json.dumps({
        "column": args.column,
        "rate_per_us": fit.rate,
        "y_inf": fit.y_inf,
        "y_0": fit.y_0,
        "rms_residual": fit.rms_residual,
        "iterations": fit.iterations,
    }, indent=2), args)
    return 0


def _cmd_spectrum(args) -> int:
    _, cols = read_trajectory_csv(args.input)
    if args.column not in cols:
        raise ValueError(f"{args.input}: no column {args.column!r}")
    freq = analysis.dominant_frequency(cols["t_us"], cols[args.column])
    _emit(json.dumps({"column": args.column, "frequency_mhz": freq}, indent=2), args)
    return 0


def _cmd_verify(args) -> int:
    from . import acceptance

    results = acceptance.run_all(echo=True)
    return 0 if all(r.passed for r in results) else 2


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dressed-cool", description=__doc__)
    parser.add_argument("--version", action="version", version=f"dressed-cool {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")

    def add(name, func, help_text, *, output=True, timestamp=False, reads_input=False):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("-c", "--config", help="path to a flat JSON config file")
        if output:
            sp.add_argument("-o", "--output", help="output file (default: stdout or a derived name)")
        if timestamp:
            sp.add_argument("--no-timestamp", action="store_true",
                            help="omit the timestamp metadata line for byte-identical reruns")
        if reads_input:
            sp.add_argument("-i", "--input", required=True, help="trajectory CSV to analyze")
            sp.add_argument("--column", default="sx", help="column to analyze (default sx)")
        sp.set_defaults(func=func)
        return sp

    add("rates", _cmd_rates, "print analytic dressed-state rates and the steady Bloch prediction")
    add("evolve", _cmd_evolve, "integrate the master equation and write a trajectory CSV", timestamp=True)
    add("steady", _cmd_steady, "solve the steady state and print tomography values")
    add("sweep", _cmd_sweep, "run a power x detuning sweep and write the table CSV", timestamp=True)
    add("fit", _cmd_fit, "fit an exponential relaxation to a trajectory CSV column", reads_input=True)
    add("spectrum", _cmd_spectrum, "extract the dominant oscillation frequency from a trajectory CSV",
        reads_input=True)
    add("verify", _cmd_verify, "run the acceptance suite and print one pass/fail line per criterion",
        output=False)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "command", None) is None:
            parser.print_usage(sys.stderr)
            print("error: a subcommand is required", file=sys.stderr)
            return 1
        return args.func(args)
    except _UsageError as exc:
        exc.parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


def app() -> None:
    raise SystemExit(main(sys.argv[1:]))


if __name__ == "__main__":
    app()
