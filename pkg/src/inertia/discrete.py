"""Discrete-time momentum updates and their (nearly conserved) energy.

The map is

    v' = v - eta * grad L(w)
    w' = w + eta * v'        (note: the *new* velocity)

with a single step-size parameter eta. Updating the velocity first makes
this a symplectic-Euler-type map: on 1D quadratics the one-step transition
matrix [[1 - eta^2, eta], [-eta, 1]] has determinant exactly 1, so phase
space area is preserved and the energy 1/2 ||v||^2 + L(w) stays bounded
(not drifting) for eta below the stability threshold eta = 2 of the unit
quadratic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import _as_readonly_vector
from .errors import InvalidArgument, NumericalFailure
from .landscapes import LossLandscape

__all__ = ["DiscreteState", "momentum_step", "discrete_inertia", "drift_profile"]


@dataclass(frozen=True)
class DiscreteState:
    w: np.ndarray
    v: np.ndarray
    step_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "w", _as_readonly_vector(self.w, "w"))
        object.__setattr__(self, "v", _as_readonly_vector(self.v, "v"))
        if self.w.shape != self.v.shape:
            raise InvalidArgument(
                f"w and v must have equal dimension, got {self.w.shape[0]} and {self.v.shape[0]}"
            )
        if self.step_index < 0:
            raise InvalidArgument(f"step_index must be >= 0, got {self.step_index}")


def momentum_step(state: DiscreteState, eta_step: float, landscape: LossLandscape) -> DiscreteState:
    """One velocity-first update; eta_step plays the role of a time step."""
    if eta_step <= 0:
        raise InvalidArgument(f"eta_step must be positive, got {eta_step}")
    if state.w.shape[0] != landscape.dim:
        raise InvalidArgument(
            f"state dimension {state.w.shape[0]} does not match landscape dimension "
            f"{landscape.dim}"
        )
    v = state.v - eta_step * landscape.gradient(state.w)
    w = state.w + eta_step * v
    return DiscreteState(w, v, state.step_index + 1)


def discrete_inertia(state: DiscreteState, landscape: LossLandscape) -> float:
    """1/2 ||v||^2 + L(w), the same functional as the continuous-time energy."""
    if state.w.shape[0] != landscape.dim:
        raise InvalidArgument(
            f"state dimension {state.w.shape[0]} does not match landscape dimension "
            f"{landscape.dim}"
        )
    return 0.5 * float(state.v @ state.v) + float(landscape.value(state.w))


def drift_profile(
    w0: np.ndarray,
    v0: np.ndarray,
    eta_step: float,
    n_steps: int,
    landscape: LossLandscape,
) -> tuple[np.ndarray, float]:
    """Energy series I_t for t = 0..n_steps plus max_t |I_t - I_0|.

    For step-size scaling studies, keep the physical horizon
    n_steps * eta_step fixed while varying eta_step.
    """
    if eta_step <= 0:
        raise InvalidArgument(f"eta_step must be positive, got {eta_step}")
    if n_steps < 1:
        raise InvalidArgument(f"n_steps must be >= 1, got {n_steps}")
    w = np.array(w0, dtype=float).reshape(-1)
    v = np.array(v0, dtype=float).reshape(-1)
    if w.shape != v.shape:
        raise InvalidArgument("w0 and v0 must have equal dimension")
    if w.shape[0] != landscape.dim:
        raise InvalidArgument(
            f"initial dimension {w.shape[0]} does not match landscape dimension {landscape.dim}"
        )
    grad = landscape.gradient
    value = landscape.value
    series = np.empty(n_steps + 1)
    series[0] = 0.5 * float(v @ v) + float(value(w))
    for k in range(1, n_steps + 1):
        v = v - eta_step * grad(w)
        w = w + eta_step * v
        energy = 0.5 * float(v @ v) + float(value(w))
        if not np.isfinite(energy):
            raise NumericalFailure(f"energy not finite at step {k}", step_index=k)
        series[k] = energy
    return series, float(np.max(np.abs(series - series[0])))
