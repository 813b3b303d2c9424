"""The second-order system and its energy functional.

The deterministic dynamics are

    d2w/dt2 + gamma * dw/dt + grad L(w) = 0,

optionally forced by a zero-mean noise process eta(t) on the right-hand
side. The scalar

    I = 1/2 ||dw/dt||^2 + L(w)

is conserved when gamma = 0 and decays at the pointwise rate
dI/dt = -gamma ||dw/dt||^2 otherwise (for smooth forcing the rate gains
the work term <eta, dw/dt>).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, NumericalFailure
from .landscapes import LossLandscape

__all__ = [
    "State",
    "SystemSpec",
    "NOISE_KINDS",
    "inertia",
    "acceleration",
    "inertia_rate_theoretical",
]

NOISE_KINDS = ("none", "white", "ou")


def _as_readonly_vector(x, name: str) -> np.ndarray:
    arr = np.array(x, dtype=float).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise NumericalFailure(f"{name} contains non-finite components: {arr!r}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class State:
    """A phase-space point: parameters ``w``, velocity ``v``, time ``t``."""

    w: np.ndarray
    v: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "w", _as_readonly_vector(self.w, "w"))
        object.__setattr__(self, "v", _as_readonly_vector(self.v, "v"))
        if self.w.shape != self.v.shape:
            raise InvalidArgument(
                f"w and v must have equal dimension, got {self.w.shape[0]} and {self.v.shape[0]}"
            )
        if not np.isfinite(self.t):
            raise NumericalFailure(f"time is not finite: {self.t}")

    @property
    def dim(self) -> int:
        return self.w.shape[0]


@dataclass(frozen=True)
class SystemSpec:
    """Landscape plus damping and (optional) noise process parameters.

    ``noise_kind`` is one of ``none``, ``white``, or ``ou``. For white noise,
    ``sigma`` scales the velocity increments: sigma * sqrt(h) per step of
    size h. For the exponentially correlated (Ornstein-Uhlenbeck) option,
    ``sigma`` is the stationary standard deviation of the forcing and
    ``tau`` its correlation time. A zero-amplitude noisy spec (sigma = 0,
    noise_kind != none) is allowed and degenerates to the deterministic
    dynamics.
    """

    landscape: LossLandscape
    gamma: float = 0.0
    sigma: float = 0.0
    noise_kind: str = "none"
    tau: float | None = None

    def __post_init__(self):
        if self.gamma < 0:
            raise InvalidArgument(f"gamma must be >= 0, got {self.gamma}")
        if self.sigma < 0:
            raise InvalidArgument(f"sigma must be >= 0, got {self.sigma}")
        if self.noise_kind not in NOISE_KINDS:
            raise InvalidArgument(
                f"noise_kind must be one of {NOISE_KINDS}, got {self.noise_kind!r}"
            )
        if self.noise_kind == "none" and self.sigma > 0:
            raise InvalidArgument("sigma > 0 requires a noise kind")
        if self.noise_kind == "ou":
            if self.tau is None or self.tau <= 0:
                raise InvalidArgument(f"ou noise requires tau > 0, got {self.tau}")
        elif self.tau is not None:
            raise InvalidArgument("tau is only meaningful for ou noise")

    @property
    def deterministic(self) -> bool:
        return self.noise_kind == "none"


def inertia(state: State, landscape: LossLandscape) -> float:
    """Kinetic plus potential energy: 1/2 ||v||^2 + L(w)."""
    if state.dim != landscape.dim:
        raise InvalidArgument(
            f"state dimension {state.dim} does not match landscape dimension {landscape.dim}"
        )
    return 0.5 * float(state.v @ state.v) + float(landscape.value(state.w))


def acceleration(
    state: State, spec: SystemSpec, noise_value: np.ndarray | None = None
) -> np.ndarray:
    """The instantaneous acceleration -gamma*v - grad L(w) + noise_value.

    ``noise_value`` defaults to the zero vector (deterministic dynamics).
    """
    if noise_value is None:
        noise_value = np.zeros(state.dim)
    noise_value = np.asarray(noise_value, dtype=float).reshape(-1)
    if state.dim != spec.landscape.dim:
        raise InvalidArgument(
            f"state dimension {state.dim} does not match landscape dimension "
            f"{spec.landscape.dim}"
        )
    if noise_value.shape[0] != state.dim:
        raise InvalidArgument(
            f"noise dimension {noise_value.shape[0]} does not match state dimension {state.dim}"
        )
    return -spec.gamma * state.v - spec.landscape.gradient(state.w) + noise_value


def inertia_rate_theoretical(state: State, spec: SystemSpec) -> float:
    """The deterministic energy decay rate -gamma * ||v||^2 (always <= 0).

    Only defined for noise-free dynamics; under forcing the pointwise
    identity does not hold, so a stochastic spec is rejected.
    """
    if not spec.deterministic:
        raise InvalidArgument("pointwise decay rate is only defined without noise")
    return -spec.gamma * float(state.v @ state.v)
