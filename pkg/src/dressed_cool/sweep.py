"""Drive-power x drive-detuning sweeps of the engineered-bath steady state.

The power axis is referenced to one intracavity photon: P_d = 10 log10(n_bar)
dB, so 0 dB means n_bar = 1 (and -inf dB means an undriven cavity).  The
detuning axis holds the bare qubit drive detuning delta_q; the Stark-shifted
detuning at each point is delta_q' = delta_q + 2 chi n_bar.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import __version__
from . import analysis, dynamics, model, rates

__all__ = [
    "SweepGrid",
    "SweepRow",
    "SweepTable",
    "run_sweep",
    "stark_line",
    "optimal_theta_detuning",
    "apply_tomography_scale",
]

WORKERS_ENV = "DRESSED_COOL_WORKERS"
_MODES = ("steady_tomography", "cooling_rate", "rates_analytic_map")


@dataclass(frozen=True)
class SweepGrid:
    """Cartesian sweep specification.

    power_db and detuning are the axes (dB referenced to one photon; rad/us).
    theta is the fixed tomography angle (radians) used for the s_theta column.
    auto_n_fock rechooses the cavity cutoff at each point's n_bar.
    """

    power_db: np.ndarray
    detuning: np.ndarray
    fixed: model.SystemParams
    mode: str = "steady_tomography"
    theta: float = math.pi / 2
    auto_n_fock: bool = True

    def __post_init__(self):
        object.__setattr__(self, "power_db", np.atleast_1d(np.asarray(self.power_db, dtype=float)))
        object.__setattr__(self, "detuning", np.atleast_1d(np.asarray(self.detuning, dtype=float)))
        if self.power_db.size == 0 or self.detuning.size == 0:
            raise ValueError("sweep axes must be non-empty")
        for name in ("power_db", "detuning"):
            axis = getattr(self, name)
            if axis.size > 1 and np.any(np.diff(axis) <= 0):
                raise ValueError(f"{name} axis must be strictly increasing")
        if self.mode not in _MODES:
            raise ValueError(f"unknown sweep mode {self.mode!r}; expected one of {_MODES}")
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError("theta must lie in [0, pi]")


@dataclass(frozen=True)
class SweepRow:
    p_d_db: float
    delta_q: float
    n_bar: float
    eps_d: float
    sx: float
    sy: float
    sz: float
    s_theta: float
    gamma_fit: float
    converged: bool


@dataclass
class SweepTable:
    rows: list[SweepRow]
    metadata: dict


def _point_params(grid: SweepGrid, p_d_db: float, delta_q: float) -> tuple[model.SystemParams, float]:
    n_bar = 10.0 ** (p_d_db / 10.0)
    base = grid.fixed
    eps_d = model.drive_for_photons(n_bar, base.delta_c, base.kappa)
    p = replace(
        base,
        eps_d=eps_d,
        delta_q_prime=delta_q + 2.0 * base.chi * n_bar,
    )
    if grid.auto_n_fock:
        p = p.with_n_fock(model.choose_fock_cutoff(p, frame="displaced"))
    return p, n_bar


def _evaluate_point(args: tuple[SweepGrid, float, float]) -> SweepRow:
    grid, p_d_db, delta_q = args
    p, n_bar = _point_params(grid, p_d_db, delta_q)
    nan = math.nan
    try:
        if grid.mode == "rates_analytic_map":
            pair = rates.rates_general(p)
            theta_pt = math.atan2(p.omega_r_rabi, p.delta_q_prime)
            pred = rates.steady_bloch(pair, theta_pt)
            v = analysis.BlochVector(
                x=pred.sigma_theta_ss * math.sin(theta_pt),
                y=0.0,
                z=pred.sigma_theta_ss * math.cos(theta_pt),
            )
            gamma = pair.total
        else:
            h = model.build_hamiltonian_displaced(p)
            ls = model.collapse_ops(p, frame="displaced")
            rho = dynamics.steady_state(h, ls)
            v = analysis.bloch_vector(rho)
            gamma = nan
            if grid.mode == "cooling_rate":
                pair = rates.rates_general(p)
                traj = analysis.cooling_trajectory(p, t_max=10.0 / pair.total)
                gamma = analysis.fit_exponential(
                    traj.times, traj.expectations["sx"].real
                ).rate
        return SweepRow(
            p_d_db=p_d_db,
            delta_q=delta_q,
            n_bar=n_bar,
            eps_d=p.eps_d,
            sx=v.x, sy=v.y, sz=v.z,
            s_theta=analysis.sigma_theta_projection(v, grid.theta),
            gamma_fit=gamma,
            converged=True,
        )
    except Exception:
        return SweepRow(
            p_d_db=p_d_db, delta_q=delta_q, n_bar=n_bar, eps_d=p.eps_d,
            sx=nan, sy=nan, sz=nan, s_theta=nan, gamma_fit=nan, converged=False,
        )


def resolve_workers(requested: int | None) -> int:
    """Worker count; the DRESSED_COOL_WORKERS environment variable wins."""
    env = os.environ.get(WORKERS_ENV)
    if env is not None:
        n = int(env)
        if n < 1:
            raise ValueError(f"{WORKERS_ENV} must be a positive integer, got {env!r}")
        return n
    if requested is None or requested == 0:
        return os.cpu_count() or 1
    if requested < 1:
        raise ValueError(f"worker count must be positive, got {requested}")
    return requested


def run_sweep(grid: SweepGrid, workers: int | None = 1) -> SweepTable:
    """Evaluate the grid row-major over (power, detuning).

    Results are identical for any worker count; failed points are recorded
    with converged = False rather than aborting the sweep.
    """
    n_workers = resolve_workers(workers)
    tasks = [(grid, p_d, dq) for p_d in grid.power_db for dq in grid.detuning]
    if n_workers == 1 or len(tasks) == 1:
        rows = [_evaluate_point(t) for t in tasks]
    else:
        chunk = max(1, len(tasks) // (4 * n_workers))
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            rows = list(pool.map(_evaluate_point, tasks, chunksize=chunk))
    metadata = _grid_metadata(grid)
    return SweepTable(rows=rows, metadata=metadata)


def _grid_metadata(grid: SweepGrid) -> dict:
    two_pi = 2.0 * math.pi
    p = grid.fixed
    return {
        "version": __version__,
        "mode": grid.mode,
        "theta_deg": math.degrees(grid.theta),
        "chi_mhz": p.chi / two_pi,
        "kappa_mhz": p.kappa / two_pi,
        "omega_r_mhz": p.omega_r_rabi / two_pi,
        "delta_c_mhz": p.delta_c / two_pi,
        "gamma_down_per_us": p.gamma_down,
        "gamma_up_per_us": p.gamma_up,
        "gamma_phi_per_us": p.gamma_phi,
        "n_fock": "auto" if grid.auto_n_fock else p.n_fock,
        "tomography_scale": 1.0,
    }


def stark_line(grid: SweepGrid, chi: float) -> list[tuple[float, float]]:
    """(P_d, delta_q) points where the Stark-shifted detuning vanishes:
    delta_q = -2 chi n_bar(P_d)."""
    return [
        (float(p_d), -2.0 * chi * 10.0 ** (p_d / 10.0))
        for p_d in np.atleast_1d(grid.power_db)
    ]


def optimal_theta_detuning(delta_c: float, omega_r_rabi: float) -> float:
    """Stark-shifted detuning that parks the dressed splitting on the cavity
    resonance: delta_q'* = sqrt(delta_c^2 - omega_r^2)."""
    if abs(delta_c) <= abs(omega_r_rabi):
        raise ValueError(
            "no real optimum: |delta_c| must exceed omega_r_rabi for theta cooling"
        )
    return math.sqrt(delta_c ** 2 - omega_r_rabi ** 2)


def apply_tomography_scale(table: SweepTable, s: float) -> SweepTable:
    """Scale the Bloch columns by a tomography contrast s (state columns only;
    powers, detunings, and rates are untouched).  Applications compound."""
    if not 0.0 < s <= 1.0:
        raise ValueError(f"tomography scale must lie in (0, 1], got {s}")
    rows = [
        replace(r, sx=r.sx * s, sy=r.sy * s, sz=r.sz * s, s_theta=r.s_theta * s)
        for r in table.rows
    ]
    metadata = dict(table.metadata)
    metadata["tomography_scale"] = float(metadata.get("tomography_scale", 1.0)) * s
    return SweepTable(rows=rows, metadata=metadata)
