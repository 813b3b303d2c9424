"""Fixed-step integrators for the damped/forced second-order dynamics.

Five methods are provided:

``explicit_euler``
    Forward Euler on the first-order system. Included as a negative
    control: on the frictionless quadratic it multiplies the energy by
    (1 + h^2) every step, so conservation failures are easy to demo.
``rk4``
    Classical fourth-order Runge-Kutta; the accuracy reference.
``verlet``
    Velocity Verlet (kick-drift-kick). Symplectic, time-reversible, and
    the method of choice for frictionless runs: the energy error stays
    bounded instead of drifting.
``damped_splitting``
    Symmetric splitting D(h/2) K(h/2) X(h) K(h/2) D(h/2) where D is the
    exact velocity damping v <- exp(-gamma h/2) v, K the gradient kick,
    and X the position drift. Reduces bit-for-bit to ``verlet`` when
    gamma = 0, and gives strictly monotone energy decay when gamma > 0.
``stochastic_splitting``
    Same layout with the damping replaced by the exact damped-noise
    half-step v <- a v + s xi (a = exp(-gamma h/2), s chosen so the
    velocity variance is exact for the linearized noise process). With
    sigma = 0 it reduces to ``damped_splitting``; with exponentially
    correlated noise the forcing value is carried as extra state and
    enters the kicks as an ordinary force.

All methods use a fixed step h. Stochastic runs are reproducible for a
fixed seed and generator; the generator algorithm is recorded in run
manifests as ``RNG_ALGORITHM``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import State, SystemSpec
from .errors import InvalidArgument, NumericalFailure

__all__ = [
    "METHODS",
    "RNG_ALGORITHM",
    "IntegratorConfig",
    "Trajectory",
    "member_rng",
    "integrate",
    "step_verlet",
    "step_damped_splitting",
    "step_stochastic",
    "ensemble_series",
]

METHODS = ("explicit_euler", "rk4", "verlet", "damped_splitting", "stochastic_splitting")

#: Bit generator used for all stochastic runs (recorded in manifests).
RNG_ALGORITHM = "PCG64"

# Below this damping the exact noise-variance formula sigma^2 (1-a^2)/(2 gamma)
# degenerates to 0/0; switch to its gamma -> 0 limit sigma^2 * (half-step).
_GAMMA_TINY = 1e-12


def member_rng(seed: int, member_index: int = 0) -> np.random.Generator:
    """Independent, scheduling-order-free stream for one ensemble member.

    Streams are derived from (seed, member_index), so member k's draws do
    not depend on how many members run or in what order. A single
    trajectory is member 0 of its own ensemble.
    """
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(member_index,))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class IntegratorConfig:
    method: str
    h: float
    t_end: float
    seed: int = 0
    record_every: int = 1

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidArgument(f"method must be one of {METHODS}, got {self.method!r}")
        if not self.h > 0:
            raise InvalidArgument(f"step size must be positive, got {self.h}")
        if not self.t_end > 0:
            raise InvalidArgument(f"horizon must be positive, got {self.t_end}")
        if self.t_end / self.h > 1e8:
            raise InvalidArgument(
                f"refusing a run of {self.t_end / self.h:.3g} steps (limit 1e8)"
            )
        if not (isinstance(self.seed, (int, np.integer)) and 0 <= int(self.seed) < 2**64):
            raise InvalidArgument(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if not (isinstance(self.record_every, (int, np.integer)) and self.record_every >= 1):
            raise InvalidArgument(f"record_every must be a positive integer, got {self.record_every!r}")

    @property
    def n_steps(self) -> int:
        n = int(round(self.t_end / self.h))
        if n * self.h < self.t_end - 1e-12:
            n += 1
        return n


@dataclass
class Trajectory:
    """Recorded samples of one run, with the energy evaluated per sample.

    ``ws``/``vs`` have shape (n_samples, dim). ``noise`` carries the
    forcing value at each sample for correlated-noise runs, else None.
    ``spec`` and ``config`` snapshot exactly what produced the data.
    """

    times: np.ndarray
    ws: np.ndarray
    vs: np.ndarray
    inertia: np.ndarray
    spec: SystemSpec
    config: IntegratorConfig
    noise: np.ndarray | None = None

    def __len__(self):
        return self.times.shape[0]

    def state_at(self, k: int) -> State:
        return State(self.ws[k], self.vs[k], float(self.times[k]))

    @property
    def states(self) -> list[State]:
        return [self.state_at(k) for k in range(len(self))]

    @property
    def final_state(self) -> State:
        return self.state_at(len(self) - 1)

    @property
    def speed_squared(self) -> np.ndarray:
        return np.sum(self.vs * self.vs, axis=1)


# ---------------------------------------------------------------------------
# single-step operations


def _require_dim(state: State, spec: SystemSpec):
    if state.dim != spec.landscape.dim:
        raise InvalidArgument(
            f"state dimension {state.dim} does not match landscape dimension "
            f"{spec.landscape.dim}"
        )


def step_verlet(state: State, spec: SystemSpec, h: float) -> State:
    """One kick-drift-kick step; frictionless, noise-free dynamics only."""
    _require_dim(state, spec)
    if spec.gamma != 0:
        raise InvalidArgument("verlet handles gamma = 0 only; use damped_splitting")
    if not spec.deterministic:
        raise InvalidArgument("verlet handles deterministic dynamics only")
    grad = spec.landscape.gradient
    v = state.v - 0.5 * h * grad(state.w)
    w = state.w + h * v
    v = v - 0.5 * h * grad(w)
    return State(w, v, state.t + h)


def step_damped_splitting(state: State, spec: SystemSpec, h: float) -> State:
    """One symmetric step with exact velocity damping at both ends.

    Layout: damp(h/2), kick(h/2), drift(h), kick(h/2), damp(h/2). The
    damping factor exp(-gamma h/2) is exact, so with a flat landscape the
    velocity contracts by exactly exp(-gamma h) per step; with gamma = 0
    the step is identical to velocity Verlet.
    """
    _require_dim(state, spec)
    if not spec.deterministic:
        raise InvalidArgument("damped_splitting handles deterministic dynamics only")
    grad = spec.landscape.gradient
    d = math.exp(-spec.gamma * h / 2.0)
    v = d * state.v
    v = v - 0.5 * h * grad(state.w)
    w = state.w + h * v
    v = v - 0.5 * h * grad(w)
    v = d * v
    return State(w, v, state.t + h)


def _white_noise_scale(spec: SystemSpec, h: float) -> float:
    """Std of the exact damped-noise velocity update over a half step."""
    if spec.gamma < _GAMMA_TINY:
        return spec.sigma * math.sqrt(h / 2.0)
    a = math.exp(-spec.gamma * h / 2.0)
    return spec.sigma * math.sqrt((1.0 - a * a) / (2.0 * spec.gamma))


def step_stochastic(state, spec, h, rng, eta=None):
    """One forced splitting step.

    For white noise (``eta`` must be None) the damping sub-steps become
    v <- a v + s xi with a = exp(-gamma h/2) and s the exact variance
    scale; returns the new State. Two standard-normal vectors are drawn
    per step, one per half-update, even when sigma = 0.

    For correlated noise the forcing is explicit state: pass the current
    forcing vector as ``eta`` and receive ``(state, eta_next)``. The
    forcing advances by its exact exponential update between the two
    kicks, so the first kick sees the old value and the second the new.
    """
    _require_dim(state, spec)
    if spec.deterministic:
        raise InvalidArgument("step_stochastic requires a noisy spec")
    grad = spec.landscape.gradient
    d = math.exp(-spec.gamma * h / 2.0)

    if spec.noise_kind == "white":
        if eta is not None:
            raise InvalidArgument("eta is only used with correlated noise")
        s = _white_noise_scale(spec, h)
        v = d * state.v + s * rng.standard_normal(state.dim)
        v = v - 0.5 * h * grad(state.w)
        w = state.w + h * v
        v = v - 0.5 * h * grad(w)
        v = d * v + s * rng.standard_normal(state.dim)
        return State(w, v, state.t + h)

    # correlated (exponentially decaying memory) forcing
    if eta is None:
        raise InvalidArgument("correlated noise requires the current forcing vector")
    eta = np.asarray(eta, dtype=float).reshape(-1)
    if eta.shape[0] != state.dim:
        raise InvalidArgument("forcing dimension does not match state dimension")
    c = math.exp(-h / spec.tau)
    q = spec.sigma * math.sqrt(1.0 - c * c)
    v = d * state.v
    v = v + 0.5 * h * (eta - grad(state.w))
    w = state.w + h * v
    eta_next = c * eta + q * rng.standard_normal(state.dim)
    v = v + 0.5 * h * (eta_next - grad(w))
    v = d * v
    return State(w, v, state.t + h), eta_next


def initial_forcing(spec: SystemSpec, rng: np.random.Generator) -> np.ndarray:
    """Stationary draw of the correlated forcing, eta ~ N(0, sigma^2) per coordinate."""
    if spec.noise_kind != "ou":
        raise InvalidArgument("initial forcing only exists for correlated noise")
    return spec.sigma * rng.standard_normal(spec.landscape.dim)


# ---------------------------------------------------------------------------
# trajectory integration
#
# The loops below operate on raw arrays for speed but apply exactly the
# same arithmetic, in the same order, as the public single-step functions;
# tests assert bit-equality between the two paths. They also run batched:
# w/v of shape (members, dim) step all members at once, which is what the
# ensemble runner uses.


def _check_method(spec: SystemSpec, config: IntegratorConfig):
    if config.method == "stochastic_splitting":
        if spec.deterministic:
            raise InvalidArgument("stochastic_splitting requires a noisy spec")
    else:
        if not spec.deterministic:
            raise InvalidArgument(
                f"{config.method} cannot integrate noisy dynamics; use stochastic_splitting"
            )
        if config.method == "verlet" and spec.gamma != 0:
            raise InvalidArgument("verlet requires gamma = 0; use damped_splitting")


def _record_indices(n_steps: int, stride: int) -> np.ndarray:
    idx = list(range(0, n_steps + 1, stride))
    if idx[-1] != n_steps:
        idx.append(n_steps)
    return np.asarray(idx, dtype=int)


def _make_stepper(spec: SystemSpec, config: IntegratorConfig, rng):
    """Return step(w, v, eta) -> (w, v, eta) for raw (possibly batched) arrays."""
    grad = spec.landscape.gradient
    g = spec.gamma
    h = config.h
    method = config.method

    if method == "explicit_euler":
        def step(w, v, eta):
            w_new = w + h * v
            v_new = v + h * (-g * v - grad(w))
            return w_new, v_new, None
    elif method == "rk4":
        def accel(w, v):
            return -g * v - grad(w)

        def step(w, v, eta):
            k1w = v
            k1v = accel(w, v)
            k2w = v + 0.5 * h * k1v
            k2v = accel(w + 0.5 * h * k1w, v + 0.5 * h * k1v)
            k3w = v + 0.5 * h * k2v
            k3v = accel(w + 0.5 * h * k2w, v + 0.5 * h * k2v)
            k4w = v + h * k3v
            k4v = accel(w + h * k3w, v + h * k3v)
            w_new = w + (h / 6.0) * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
            v_new = v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
            return w_new, v_new, None
    elif method in ("verlet", "damped_splitting"):
        d = math.exp(-g * h / 2.0)

        def step(w, v, eta):
            v = d * v
            v = v - 0.5 * h * grad(w)
            w = w + h * v
            v = v - 0.5 * h * grad(w)
            v = d * v
            return w, v, None
    elif spec.noise_kind == "white":
        d = math.exp(-g * h / 2.0)
        s = _white_noise_scale(spec, h)

        def step(w, v, eta):
            v = d * v + s * rng.standard_normal(v.shape)
            v = v - 0.5 * h * grad(w)
            w = w + h * v
            v = v - 0.5 * h * grad(w)
            v = d * v + s * rng.standard_normal(v.shape)
            return w, v, None
    else:  # correlated forcing
        d = math.exp(-g * h / 2.0)
        c = math.exp(-h / spec.tau)
        q = spec.sigma * math.sqrt(1.0 - c * c)

        def step(w, v, eta):
            v = d * v
            v = v + 0.5 * h * (eta - grad(w))
            w = w + h * v
            eta = c * eta + q * rng.standard_normal(v.shape)
            v = v + 0.5 * h * (eta - grad(w))
            v = d * v
            return w, v, eta

    return step


def _raise_nonfinite(w, v, k: int):
    if np.all(np.isfinite(w)) and np.all(np.isfinite(v)):
        return
    if w.ndim == 2:  # batched: identify the offending member
        bad = ~(np.all(np.isfinite(w), axis=1) & np.all(np.isfinite(v), axis=1))
        member = int(np.flatnonzero(bad)[0])
        raise NumericalFailure(
            f"non-finite state in member {member} at step {k}", step_index=k
        )
    raise NumericalFailure(f"non-finite state at step {k}", step_index=k)


def integrate(spec: SystemSpec, initial: State, config: IntegratorConfig) -> Trajectory:
    """Run ``initial`` forward to ``config.t_end`` and record samples.

    Deterministic methods are bit-reproducible unconditionally; the
    stochastic method is bit-reproducible for a fixed seed. A NaN/Inf
    state aborts with the failing step index.
    """
    _require_dim(initial, spec)
    _check_method(spec, config)

    h = config.h
    n_steps = config.n_steps
    record = _record_indices(n_steps, config.record_every)
    dim = initial.dim

    rng = None
    eta = None
    if config.method == "stochastic_splitting":
        rng = member_rng(config.seed, 0)
        if spec.noise_kind == "ou":
            eta = initial_forcing(spec, rng)
    step = _make_stepper(spec, config, rng)

    w = np.array(initial.w, dtype=float)
    v = np.array(initial.v, dtype=float)
    value = spec.landscape.value

    n_rec = record.shape[0]
    ws = np.empty((n_rec, dim))
    vs = np.empty((n_rec, dim))
    energies = np.empty(n_rec)
    etas = np.empty((n_rec, dim)) if eta is not None else None

    pos = 0
    if record[0] == 0:
        ws[0], vs[0] = w, v
        energies[0] = 0.5 * float(v @ v) + float(value(w))
        if etas is not None:
            etas[0] = eta
        pos = 1

    for k in range(1, n_steps + 1):
        w, v, eta = step(w, v, eta)
        _raise_nonfinite(w, v, k)
        if pos < n_rec and record[pos] == k:
            ws[pos], vs[pos] = w, v
            energies[pos] = 0.5 * float(v @ v) + float(value(w))
            if etas is not None:
                etas[pos] = eta
            pos += 1

    times = record * h
    return Trajectory(times, ws, vs, energies, spec, config, noise=etas)


def ensemble_series(
    spec: SystemSpec,
    initial: State,
    config: IntegratorConfig,
    n_members: int,
) -> dict[str, np.ndarray]:
    """Reduced per-member time series for an independent-member ensemble.

    All members start from ``initial`` and use streams derived from
    (config.seed, member_index); member 0 reproduces ``integrate`` with
    the same config bit-for-bit. Noise is pre-drawn per member (the
    values match step-by-step draws exactly) and the time loop advances
    all members at once.

    Returns arrays of shape (n_members, n_samples): ``inertia``,
    ``speed_squared``, and for correlated noise ``noise_dot_v``; plus the
    sample ``times``.
    """
    _require_dim(initial, spec)
    _check_method(spec, config)
    if config.method != "stochastic_splitting":
        raise InvalidArgument("ensembles are for the stochastic method")
    if n_members < 1:
        raise InvalidArgument(f"need at least one member, got {n_members}")

    h = config.h
    g = spec.gamma
    n_steps = config.n_steps
    record = _record_indices(n_steps, config.record_every)
    dim = initial.dim
    grad = spec.landscape.gradient
    value = spec.landscape.value
    correlated = spec.noise_kind == "ou"

    # Pre-draw every member's noise from its own stream. Per step the
    # stepping order consumes: white -> two vectors, correlated -> one
    # vector (after one initial stationary draw).
    if correlated:
        draws = np.empty((n_steps, n_members, dim))
        eta = np.empty((n_members, dim))
        for i in range(n_members):
            rng = member_rng(config.seed, i)
            eta[i] = spec.sigma * rng.standard_normal(dim)
            draws[:, i, :] = rng.standard_normal((n_steps, dim))
        c = math.exp(-h / spec.tau)
        q = spec.sigma * math.sqrt(1.0 - c * c)
    else:
        draws = np.empty((n_steps, 2, n_members, dim))
        for i in range(n_members):
            rng = member_rng(config.seed, i)
            draws[:, :, i, :] = rng.standard_normal((n_steps, 2, dim))
        s = _white_noise_scale(spec, h)
        eta = None
    d = math.exp(-g * h / 2.0)

    w = np.tile(np.asarray(initial.w, dtype=float), (n_members, 1))
    v = np.tile(np.asarray(initial.v, dtype=float), (n_members, 1))

    n_rec = record.shape[0]
    energy = np.empty((n_members, n_rec))
    speed_sq = np.empty((n_members, n_rec))
    noise_dot_v = np.empty((n_members, n_rec)) if correlated else None

    def record_sample(pos):
        speed_sq[:, pos] = np.sum(v * v, axis=1)
        energy[:, pos] = 0.5 * speed_sq[:, pos] + value(w)
        if correlated:
            noise_dot_v[:, pos] = np.sum(eta * v, axis=1)

    pos = 0
    if record[0] == 0:
        record_sample(0)
        pos = 1

    for k in range(1, n_steps + 1):
        if correlated:
            v = d * v
            v = v + 0.5 * h * (eta - grad(w))
            w = w + h * v
            eta = c * eta + q * draws[k - 1]
            v = v + 0.5 * h * (eta - grad(w))
            v = d * v
        else:
            v = d * v + s * draws[k - 1, 0]
            v = v - 0.5 * h * grad(w)
            w = w + h * v
            v = v - 0.5 * h * grad(w)
            v = d * v + s * draws[k - 1, 1]
        _raise_nonfinite(w, v, k)
        if pos < n_rec and record[pos] == k:
            record_sample(pos)
            pos += 1

    out = {
        "times": record * h,
        "inertia": energy,
        "speed_squared": speed_sq,
    }
    if correlated:
        out["noise_dot_v"] = noise_dot_v
    return out
