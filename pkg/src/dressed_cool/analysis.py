"""Trajectory analysis: exponential relaxation fits, dominant-frequency
extraction, Bloch-vector reduction, and simulation-vs-formula comparison."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import dynamics, model, rates
from .operators import HilbertSpace, expect_real, reduced_qubit, pauli

__all__ = [
    "ExpFit",
    "BlochVector",
    "ComparisonReport",
    "FitError",
    "FitNonConvergedError",
    "NonMonotonicDataError",
    "NoSpectralPeakError",
    "fit_exponential",
    "dominant_frequency",
    "bloch_vector",
    "sigma_theta_projection",
    "compare_sim_analytic",
]


class FitError(RuntimeError):
    pass


class FitNonConvergedError(FitError):
    pass


class NonMonotonicDataError(FitError):
    """Residual structure inconsistent with a single exponential
    (possible strong-coupling oscillation)."""


class NoSpectralPeakError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExpFit:
    """Parameters of y(t) = y_inf + (y_0 - y_inf) exp(-rate t)."""

    rate: float
    y_inf: float
    y_0: float
    rms_residual: float
    iterations: int


def _model(t, y_inf, y_0, rate):
    return y_inf + (y_0 - y_inf) * np.exp(-rate * t)


def _initial_guess(t, y):
    y_inf = float(y[-1])
    y_0 = float(y[0])
    dev = np.abs(y - y_inf)
    mask = dev > 0.05 * dev.max()
    if mask.sum() >= 2 and y_0 != y_inf:
        # log-linear regression on |y - y_inf|
        slope = np.polyfit(t[mask], np.log(dev[mask]), 1)[0]
        rate = -float(slope)
    else:
        rate = 0.0
    if not rate > 0:
        rate = 2.0 / (t[-1] - t[0])
    return np.array([y_inf, y_0, rate])


def _noise_scale(y):
    """Robust per-sample noise from second differences (trend-immune)."""
    if len(y) < 3:
        return 0.0
    d2 = y[2:] - 2.0 * y[1:-1] + y[:-2]
    return 1.4826 * float(np.median(np.abs(d2))) / math.sqrt(6.0)


def _raise_structured_or(cost, t, y, y_range, stuck_message):
    """Tell oscillatory data apart from a merely stuck optimizer."""
    rms = math.sqrt(cost / len(t))
    noise = _noise_scale(y)
    if rms > 5.0 * noise and rms > 0.05 * y_range:
        raise NonMonotonicDataError(
            f"residual rms {rms:.3g} is {rms / max(noise, 1e-300):.1f}x the noise"
            " floor; data is not a single exponential"
            " (possible strong-coupling oscillation)"
        )
    raise FitNonConvergedError(stuck_message)


def fit_exponential(times, values, max_iter: int = 200) -> ExpFit:
    """Damped Gauss-Newton fit of a single exponential relaxation.

    Raises FitNonConvergedError after max_iter iterations and
    NonMonotonicDataError when the residual carries structure far above the
    noise floor (the signature of strong-coupling oscillations).
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if t.shape != y.shape or t.ndim != 1:
        raise ValueError("times and values must be matching 1-d arrays")
    if len(t) < 8:
        raise ValueError(f"need at least 8 samples, got {len(t)}")
    span = t[-1] - t[0]
    if span <= 0:
        raise ValueError("times must increase")
    y_range = float(y.max() - y.min())
    if y_range == 0:
        raise FitError("flat trajectory: nothing to fit")

    p = _initial_guess(t, y)
    lam = 1e-3
    cost = None
    iterations = 0
    for iterations in range(1, max_iter + 1):
        y_inf, y_0, rate = p
        e = np.exp(-rate * t)
        resid = _model(t, y_inf, y_0, rate) - y
        if cost is None:
            cost = float(resid @ resid)
        jac = np.column_stack([1.0 - e, e, -(y_0 - y_inf) * t * e])
        g = jac.T @ resid
        hess = jac.T @ jac
        step = None
        for _ in range(30):
            try:
                delta = np.linalg.solve(hess + lam * np.diag(np.diag(hess)), -g)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            trial = p + delta
            trial_resid = _model(t, *trial) - y
            trial_cost = float(trial_resid @ trial_resid)
            if trial_cost <= cost:
                step = delta
                p = trial
                cost = trial_cost
                lam = max(lam / 3.0, 1e-12)
                break
            lam *= 10.0
        if step is None:
            _raise_structured_or(cost, t, y, y_range,
                                 "damping exhausted without a downhill step")
        if float(np.linalg.norm(step)) < 1e-10:
            break
    else:
        _raise_structured_or(cost, t, y, y_range,
                             f"no convergence after {max_iter} iterations")

    y_inf, y_0, rate = (float(v) for v in p)
    if rate <= 0:
        raise FitError(f"fitted rate {rate:.3e} is not positive")
    if span < 2.0 / rate:
        raise FitError(
            f"window {span:.3g} us covers less than two decay times of the fitted rate {rate:.3g}/us"
        )
    rms = math.sqrt(cost / len(t))
    noise = _noise_scale(y)
    # Structured residual far above both the noise floor and a few percent of
    # the range: not a single exponential.  Mild, smooth model error (for
    # example the fast cavity ring-up at turn-on) stays below this.
    if rms > 5.0 * noise and rms > 0.05 * y_range:
        raise NonMonotonicDataError(
            f"residual rms {rms:.3g} is {rms / max(noise, 1e-300):.1f}x the noise floor;"
            " data is not a single exponential (possible strong-coupling oscillation)"
        )
    return ExpFit(rate=rate, y_inf=y_inf, y_0=y_0, rms_residual=rms, iterations=iterations)


def dominant_frequency(times, values) -> float:
    """Dominant oscillation frequency in MHz (times in us).

    Detrends, applies a Hann window, and refines the FFT peak bin by
    parabolic interpolation of the log magnitude.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    n = len(t)
    if n < 64:
        raise ValueError(f"need at least 64 samples, got {n}")
    steps = np.diff(t)
    dt = (t[-1] - t[0]) / (n - 1)
    # tolerance covers grids that round-tripped through 9-digit CSV output
    if np.any(steps <= 0) or not np.allclose(steps, dt, rtol=1e-6, atol=1e-12):
        raise ValueError("time grid must be uniform and increasing")
    dt = float(dt)

    windowed = (y - y.mean()) * np.hanning(n)
    mag = np.abs(np.fft.rfft(windowed))
    if len(mag) < 4:
        raise ValueError("spectrum too short")
    # A frequency needs at least five periods in the window to be resolved
    # reliably, so the search starts there.  This also keeps slow relaxation
    # envelopes (far below that band) from masquerading as the peak.
    span = t[-1] - t[0]
    k_min = max(1, int(math.ceil(5.0 / span * (n * dt))))
    if k_min >= len(mag) - 1:
        raise ValueError("window too short to resolve five periods of anything")
    band = mag[k_min:]
    floor = float(np.median(band))
    k = int(np.argmax(band)) + k_min
    # inclusive so a dead-flat spectrum (peak == floor == 0) also fails
    if mag[k] <= 3.0 * floor:
        raise NoSpectralPeakError(
            f"strongest bin ({mag[k]:.3g}) is below 3x the median floor ({floor:.3g})"
        )
    if 1 <= k < len(mag) - 1:
        la, lb, lc = (math.log(max(mag[k + o], 1e-300)) for o in (-1, 0, 1))
        denom = la - 2.0 * lb + lc
        shift = 0.5 * (la - lc) / denom if denom != 0 else 0.0
        shift = float(np.clip(shift, -0.5, 0.5))
    else:
        shift = 0.0
    return float((k + shift) / (n * dt))


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    @property
    def norm(self) -> float:
        return math.sqrt(self.x ** 2 + self.y ** 2 + self.z ** 2)


def bloch_vector(rho: np.ndarray) -> BlochVector:
    """Qubit Bloch vector of a composite state (cavity traced out)."""
    rq = reduced_qubit(np.asarray(rho))
    v = BlochVector(
        x=expect_real(pauli("x"), rq),
        y=expect_real(pauli("y"), rq),
        z=expect_real(pauli("z"), rq),
    )
    if v.norm > 1.0 + 1e-9:
        raise ValueError(f"Bloch vector norm {v.norm:.6f} exceeds 1")
    return v


def sigma_theta_projection(v: BlochVector, theta: float) -> float:
    """<sigma_theta> = sin(theta) <sx> + cos(theta) <sz> (theta in radians).

    The cosine is evaluated as sin(pi/2 - theta) so the projection collapses
    to exactly v.x at theta = pi/2 and exactly v.z at theta = 0.
    """
    return math.sin(theta) * v.x + math.sin(0.5 * math.pi - theta) * v.z


@dataclass(frozen=True)
class ComparisonReport:
    """One simulation-vs-formula comparison at a single operating point."""

    n_bar: float
    coupling_ratio: float
    gamma_fit: float
    gamma_analytic: float
    sx_sim: float
    sx_analytic: float
    non_exponential: bool
    fit_window_us: float
    tolerance: float
    passed: bool

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def cooling_trajectory(
    p: model.SystemParams,
    t_max: float,
    n_times: int = 401,
    initial: str = "turn_on",
    rtol: float = 1e-8,
    atol: float = 1e-10,
    track_conservation: bool = False,
) -> dynamics.Trajectory:
    """<sx>(t) after switching the drives on at t = 0 (displaced frame)."""
    if initial == "turn_on":
        rho0 = model.turn_on_state(p, frame="displaced")
    else:
        rho0 = model.qubit_axis_state(p, initial)
    h = model.build_hamiltonian_displaced(p)
    ls = model.collapse_ops(p, frame="displaced")
    hs = HilbertSpace(p.n_fock)
    t_grid = np.linspace(0.0, t_max, n_times)
    return dynamics.evolve(
        h, ls, rho0, t_grid, rtol=rtol, atol=atol,
        observables={"sx": hs.sx, "sy": hs.sy, "sz": hs.sz},
        track_conservation=track_conservation,
    )


def compare_sim_analytic(
    p: model.SystemParams,
    tolerance: float = 0.10,
    initial: str = "turn_on",
    n_times: int = 401,
) -> ComparisonReport:
    """Fit the simulated relaxation of <sx> and compare against the
    detailed-balance formulas at the same operating point.

    In the strong-coupling regime (|chi| sqrt(n_bar) >= kappa) the relaxation
    is oscillatory, the report is flagged non-exponential, and no rate is fit.
    """
    n_bar = model.n_bar_of(p)
    ratio = model.coupling_ratio(p)
    pair = rates.rates_resonant(p) if p.delta_q_prime == 0 else rates.rates_general(p)
    gamma_analytic = pair.total
    theta = math.atan2(p.omega_r_rabi, p.delta_q_prime)
    pred = rates.steady_bloch(pair, theta=theta)
    sx_analytic = pred.sigma_theta_ss * math.sin(theta)

    rho_ss = dynamics.steady_state(
        model.build_hamiltonian_displaced(p), model.collapse_ops(p)
    )
    sx_sim = bloch_vector(rho_ss).x

    t_max = 10.0 / gamma_analytic
    non_exponential = ratio >= 1.0
    gamma_fit = math.nan
    if not non_exponential:
        traj = cooling_trajectory(p, t_max, n_times=n_times, initial=initial)
        try:
            gamma_fit = fit_exponential(traj.times, traj.expectations["sx"].real).rate
        except FitError:
            non_exponential = True

    passed = (
        not non_exponential
        and abs(gamma_fit - gamma_analytic) <= tolerance * gamma_analytic
        and abs(sx_sim - sx_analytic) <= tolerance * max(abs(sx_analytic), 1e-12)
    )
    return ComparisonReport(
        n_bar=n_bar,
        coupling_ratio=ratio,
        gamma_fit=gamma_fit,
        gamma_analytic=gamma_analytic,
        sx_sim=sx_sim,
        sx_analytic=sx_analytic,
        non_exponential=non_exponential,
        fit_window_us=t_max,
        tolerance=tolerance,
        passed=passed,
    )
