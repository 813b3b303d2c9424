"""Closed forms, decay-rate fitting, and ensemble dissipation estimates.

The underdamped closed form for the unit 1D quadratic is

    w(t) = exp(-gamma t / 2) (A cos(omega t) + B sin(omega t)),
    omega = sqrt(1 - gamma^2 / 4),

valid for 0 <= gamma < 2. Its energy decays like exp(-gamma t) times an
order-gamma oscillation, so decay rates are estimated by a log-linear fit,
optionally after averaging the log-energy over one oscillation period to
strip the wobble (the energy oscillates at frequency 2 omega, i.e. with
period pi/omega; one *damped period* 2 pi/omega contains two full wobbles,
so averaging over either cancels it).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import State, SystemSpec
from .errors import InvalidArgument, NumericalFailure
from .integrators import IntegratorConfig, Trajectory, ensemble_series, integrate
from .landscapes import quadratic_isotropic

__all__ = [
    "ClosedFormSolution",
    "DecayFit",
    "SweepEntry",
    "EnsembleStats",
    "EnsembleResult",
    "closed_form_underdamped",
    "fit_decay_rate",
    "damped_period",
    "sweep_gamma",
    "ensemble_expected_decay",
]


@dataclass(frozen=True)
class ClosedFormSolution:
    """Underdamped oscillator solution with analytic derivatives."""

    gamma: float
    A: float
    B: float
    omega: float

    def position(self, t):
        t = np.asarray(t, dtype=float)
        envelope = np.exp(-0.5 * self.gamma * t)
        return envelope * (self.A * np.cos(self.omega * t) + self.B * np.sin(self.omega * t))

    def velocity(self, t):
        t = np.asarray(t, dtype=float)
        envelope = np.exp(-0.5 * self.gamma * t)
        cos, sin = np.cos(self.omega * t), np.sin(self.omega * t)
        oscillation = self.A * cos + self.B * sin
        d_oscillation = self.omega * (-self.A * sin + self.B * cos)
        return envelope * (d_oscillation - 0.5 * self.gamma * oscillation)

    def acceleration(self, t):
        """Second derivative, differentiated analytically (no finite differences)."""
        t = np.asarray(t, dtype=float)
        envelope = np.exp(-0.5 * self.gamma * t)
        cos, sin = np.cos(self.omega * t), np.sin(self.omega * t)
        oscillation = self.A * cos + self.B * sin
        d_oscillation = self.omega * (-self.A * sin + self.B * cos)
        dd_oscillation = -self.omega ** 2 * oscillation
        return envelope * (
            dd_oscillation - self.gamma * d_oscillation + 0.25 * self.gamma ** 2 * oscillation
        )

    def evaluate(self, t):
        """(w, dw/dt) at time(s) t."""
        return self.position(t), self.velocity(t)

    def inertia(self, t):
        w, v = self.evaluate(t)
        return 0.5 * v * v + 0.5 * w * w


def closed_form_underdamped(gamma: float, w0: float, v0: float) -> ClosedFormSolution:
    """Coefficients matching w(0) = w0, dw/dt(0) = v0 on the unit 1D quadratic."""
    if not 0 <= gamma < 2:
        raise InvalidArgument(
            f"closed form covers the underdamped regime 0 <= gamma < 2, got {gamma}"
        )
    omega = math.sqrt(1.0 - gamma * gamma / 4.0)
    a = float(w0)
    b = (float(v0) + 0.5 * gamma * float(w0)) / omega
    return ClosedFormSolution(gamma=float(gamma), A=a, B=b, omega=omega)


def damped_period(gamma: float) -> float:
    """2 pi / omega, the oscillation period of the underdamped solution."""
    if not 0 <= gamma < 2:
        raise InvalidArgument(f"period is defined for 0 <= gamma < 2, got {gamma}")
    return 2.0 * math.pi / math.sqrt(1.0 - gamma * gamma / 4.0)


@dataclass(frozen=True)
class DecayFit:
    gamma_hat: float
    r_squared: float
    window: tuple[float, float]
    n_points: int


def _moving_average(y: np.ndarray, half_width: int) -> np.ndarray:
    """Centered moving average; output is shorter by half_width on each side."""
    window = 2 * half_width + 1
    kernel = np.full(window, 1.0 / window)
    return np.convolve(y, kernel, mode="valid")


def fit_decay_rate(
    trajectory: Trajectory,
    window: tuple[float, float],
    smooth_period: float | None = None,
) -> DecayFit:
    """Least-squares slope of ln I(t) over ``window``; gamma_hat = -slope.

    The energy of an underdamped run oscillates around its exponential
    envelope, so for an unbiased rate the window should span an integer
    number of damped periods (caller's duty). Passing ``smooth_period``
    additionally averages ln I over that duration before fitting, which
    removes the oscillation from the residuals as well (the fitted window
    shrinks by half a period at each end).
    """
    t_start, t_end = float(window[0]), float(window[1])
    if not t_start < t_end:
        raise InvalidArgument(f"empty fit window {window!r}")
    times = trajectory.times
    if t_start < times[0] - 1e-9 or t_end > times[-1] + 1e-9:
        raise InvalidArgument(
            f"window {window!r} outside trajectory range [{times[0]}, {times[-1]}]"
        )
    mask = (times >= t_start - 1e-9) & (times <= t_end + 1e-9)
    t = times[mask]
    energy = trajectory.inertia[mask]
    if np.any(energy <= 0):
        raise InvalidArgument("energy must be positive throughout the fit window")
    y = np.log(energy)

    if smooth_period is not None:
        if smooth_period <= 0:
            raise InvalidArgument(f"smooth_period must be positive, got {smooth_period}")
        dt = t[1] - t[0]
        half_width = int(round(0.5 * smooth_period / dt))
        if 2 * half_width + 1 > t.shape[0]:
            raise InvalidArgument("smoothing window longer than the fit window")
        y = _moving_average(y, half_width)
        t = t[half_width : t.shape[0] - half_width]

    if t.shape[0] < 10:
        raise InvalidArgument(f"need at least 10 samples to fit, got {t.shape[0]}")

    slope, intercept = np.polyfit(t, y, 1)
    residuals = y - (slope * t + intercept)
    ss_res = float(residuals @ residuals)
    centered = y - y.mean()
    ss_tot = float(centered @ centered)
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return DecayFit(
        gamma_hat=float(-slope),
        r_squared=float(min(max(r_squared, 0.0), 1.0)),
        window=(float(t[0]), float(t[-1])),
        n_points=int(t.shape[0]),
    )


@dataclass(frozen=True)
class SweepEntry:
    gamma: float
    gamma_hat: float | None
    r_squared: float | None
    error: str | None = None


def sweep_gamma(
    gammas,
    h: float = 0.01,
    n_periods: int = 5,
    w0: float = 1.0,
    v0: float = 0.0,
    smooth: bool = True,
) -> list[SweepEntry]:
    """Fit the decay rate of one damped run per gamma on the unit 1D quadratic.

    Each run covers ``n_periods`` damped periods of its own gamma. Fit
    failures are captured per entry instead of aborting the sweep. Output
    is sorted by gamma.
    """
    landscape = quadratic_isotropic(1)
    entries = []
    for gamma in sorted(float(g) for g in gammas):
        try:
            if not 0 <= gamma < 2:
                raise InvalidArgument(f"sweep requires 0 <= gamma < 2, got {gamma}")
            period = damped_period(gamma)
            t_end = n_periods * period
            spec = SystemSpec(landscape=landscape, gamma=gamma)
            config = IntegratorConfig(method="damped_splitting", h=h, t_end=t_end)
            trajectory = integrate(spec, State([w0], [v0]), config)
            fit = fit_decay_rate(
                trajectory,
                (0.0, trajectory.times[-1]),
                smooth_period=period if smooth else None,
            )
            entries.append(SweepEntry(gamma, fit.gamma_hat, fit.r_squared))
        except (InvalidArgument, NumericalFailure) as exc:
            entries.append(SweepEntry(gamma, None, None, error=str(exc)))
    return entries


@dataclass(frozen=True)
class EnsembleStats:
    """Per-time-index sample mean and standard error of one quantity."""

    n_members: int
    mean_series: np.ndarray
    stderr_series: np.ndarray
    quantity: str  # "inertia", "inertia_rate", or "speed_squared"


@dataclass(frozen=True)
class EnsembleResult:
    """Ensemble statistics plus the time-averaged dissipation balance.

    ``balance_residual`` is the member-mean of

        time-avg(dI/dt) + gamma * time-avg(||v||^2) - (noise work term)

    where the work term is sigma^2 * dim / 2 for white noise (the
    second-order correction to the naive expected rate) and the recorded
    time average of <eta, v> for correlated noise. ``balance_stderr`` is
    its standard error across members. Time averages run over
    (burn_in, t_end); interior samples only, since dI/dt is a centered
    difference.
    """

    times: np.ndarray
    n_members: int
    inertia: EnsembleStats
    inertia_rate: EnsembleStats
    speed_squared: EnsembleStats
    mean_noise_dot_v: np.ndarray | None
    balance_residual: float
    balance_stderr: float
    burn_in: float


def _centered_rate(series: np.ndarray, dt: float) -> np.ndarray:
    """d/dt by centered differences; one-sided O(h^2) stencils at the ends."""
    rate = np.empty_like(series)
    rate[..., 1:-1] = (series[..., 2:] - series[..., :-2]) / (2.0 * dt)
    rate[..., 0] = (-3.0 * series[..., 0] + 4.0 * series[..., 1] - series[..., 2]) / (2.0 * dt)
    rate[..., -1] = (3.0 * series[..., -1] - 4.0 * series[..., -2] + series[..., -3]) / (2.0 * dt)
    return rate


def _stats(values: np.ndarray, n: int, quantity: str) -> EnsembleStats:
    mean = values.mean(axis=0)
    if n > 1:
        stderr = values.std(axis=0, ddof=1) / math.sqrt(n)
        # Columns where every member agrees bitwise have zero sample scatter
        # by definition; the two-pass std can still leave ~1 ulp of the mean
        # behind, so force those to exact zero.
        degenerate = values.max(axis=0) == values.min(axis=0)
        if degenerate.any():
            stderr = np.where(degenerate, 0.0, stderr)
    else:
        stderr = np.zeros_like(mean)
    return EnsembleStats(n, mean, stderr, quantity)


def ensemble_expected_decay(
    spec: SystemSpec,
    initial: State,
    config: IntegratorConfig,
    n_members: int,
    burn_in: float = 0.0,
) -> EnsembleResult:
    """Estimate the expected energy decay of a noisy system by Monte Carlo.

    Runs ``n_members`` independent members (streams derived from
    config.seed and the member index), then reduces to per-time-index
    means and standard errors of the energy, its centered-difference time
    derivative, and the squared speed. ``burn_in`` excludes the initial
    transient from the balance time averages; the recorded series always
    cover the full run.

    Aggregation order is fixed, so results do not depend on how members
    would be scheduled.
    """
    if n_members < 100:
        raise InvalidArgument(f"need at least 100 members for stable statistics, got {n_members}")
    if spec.deterministic:
        raise InvalidArgument("ensemble estimates are for noisy dynamics")
    if config.record_every != 1:
        raise InvalidArgument("balance estimates need every step recorded (record_every=1)")
    if not 0 <= burn_in < config.t_end:
        raise InvalidArgument(f"burn_in must lie in [0, t_end), got {burn_in}")

    series = ensemble_series(spec, initial, config, n_members)
    times = series["times"]
    energy = series["inertia"]
    speed_sq = series["speed_squared"]
    noise_dot_v = series.get("noise_dot_v")

    dt = config.h
    rate = _centered_rate(energy, dt)

    # Per-member time-averaged balance over interior samples past the burn-in.
    start = int(np.searchsorted(times, burn_in - 1e-9))
    start = max(start, 1)
    stop = times.shape[0] - 1
    if stop - start < 10:
        raise InvalidArgument("burn_in leaves too few samples for the balance average")
    sl = slice(start, stop)
    residual = rate[:, sl].mean(axis=1) + spec.gamma * speed_sq[:, sl].mean(axis=1)
    if spec.noise_kind == "white":
        residual -= 0.5 * spec.sigma ** 2 * initial.dim
    else:
        residual -= noise_dot_v[:, sl].mean(axis=1)
    balance_residual = float(residual.mean())
    if n_members > 1 and residual.max() != residual.min():
        balance_stderr = float(residual.std(ddof=1) / math.sqrt(n_members))
    else:
        balance_stderr = 0.0

    return EnsembleResult(
        times=times,
        n_members=n_members,
        inertia=_stats(energy, n_members, "inertia"),
        inertia_rate=_stats(rate, n_members, "inertia_rate"),
        speed_squared=_stats(speed_sq, n_members, "speed_squared"),
        mean_noise_dot_v=None if noise_dot_v is None else noise_dot_v.mean(axis=0),
        balance_residual=balance_residual,
        balance_stderr=balance_stderr,
        burn_in=float(burn_in),
    )
