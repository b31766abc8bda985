"""Collective-spin moment propagation for a light-probe weak measurement.

Each cycle rotates the total angular momentum by the free evolution, applies
the Gaussian-averaged back-action of a dispersive light kick, and cancels the
average kick with a deterministic counter-rotation. Means and symmetrized
second moments are propagated exactly at this Gaussian order; the sensitivity
is the end-of-run variance over the squared frequency derivative of the mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFrequencyError

_SYMMETRY_TOL = 1e-12
_VARIANCE_TOL = 1e-9


@dataclass(frozen=True)
class CollectiveMoments:
    """First moment <J> and symmetrized second moments <{J_a, J_b}>/2."""

    mean: np.ndarray
    second: np.ndarray

    def __post_init__(self):
        if self.mean.shape != (3,):
            raise ValueError("mean must be a 3-vector")
        if self.second.shape != (3, 3):
            raise ValueError("second must be a 3x3 matrix")
        scale = max(1.0, float(np.abs(self.second).max()))
        if np.abs(self.second - self.second.T).max() > _SYMMETRY_TOL * scale:
            raise ValueError("second-moment matrix lost symmetry")
        variance = np.diag(self.second) - self.mean**2
        if variance.min() < -_VARIANCE_TOL * scale:
            raise ValueError(f"negative variance {variance.min():.3e}")

    def variances(self) -> np.ndarray:
        return np.diag(self.second) - self.mean**2


def initial_css_moments(N: int) -> CollectiveMoments:
    """Coherent spin state along x: <J> = (N/2, 0, 0), transverse noise N/4."""
    if N < 1:
        raise ValueError(f"need at least one atom, got N={N}")
    mean = np.array([N / 2.0, 0.0, 0.0])
    second = np.diag([N * N / 4.0, N / 4.0, N / 4.0])
    return CollectiveMoments(mean=mean, second=second)


def _rotation_z_plane(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _rotation_x(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def propagate_collective_moments(
    chi_tp: float, omega: float, tau: float, steps: int, N: int
) -> CollectiveMoments:
    """Moments after `steps` cycles of evolution, kick average, counter-rotation.

    The kick angle is a centered Gaussian of variance (chi_tp)^2/2 set by the
    vacuum statistics of the light quadrature. Averaging rotates the frame by
    half that variance, so the counter-rotation restores the mean to a pure
    precession and <J_x(k tau)> = (N/2) cos(2 omega k tau) holds exactly. The
    second moments keep the residual back-action diffusion.
    """
    if chi_tp < 0.0:
        raise ValueError(f"kick strength must be non-negative, got {chi_tp}")
    if steps < 1:
        raise ValueError(f"need at least one step, got {steps}")
    if tau <= 0.0 or not math.isfinite(tau):
        raise ValueError(f"tau must be positive and finite, got {tau}")
    if not math.isfinite(omega):
        raise ValueError(f"omega must be finite, got {omega}")

    half_var = (chi_tp / 2.0) ** 2
    avg_cos = math.cos(half_var)
    avg_sin = math.sin(half_var)
    avg_cos_sq = 0.5 * (1.0 + math.cos(4.0 * half_var))
    avg_sin_sq = 0.5 * (1.0 - math.cos(4.0 * half_var))
    avg_cross = 0.5 * math.sin(4.0 * half_var)

    free = _rotation_z_plane(2.0 * omega * tau)
    counter = _rotation_x(-half_var)
    avg_kick = _rotation_x(half_var)

    state = initial_css_moments(N)
    mean = state.mean.copy()
    second = state.second.copy()
    for _ in range(steps):
        mean = counter @ (avg_kick @ (free @ mean))
        s = free @ second @ free.T
        kicked = np.empty_like(s)
        kicked[0, 0] = s[0, 0]
        kicked[0, 1] = kicked[1, 0] = avg_cos * s[0, 1] - avg_sin * s[0, 2]
        kicked[0, 2] = kicked[2, 0] = avg_sin * s[0, 1] + avg_cos * s[0, 2]
        kicked[1, 1] = avg_cos_sq * s[1, 1] - 2.0 * avg_cross * s[1, 2] + avg_sin_sq * s[2, 2]
        kicked[2, 2] = avg_sin_sq * s[1, 1] + 2.0 * avg_cross * s[1, 2] + avg_cos_sq * s[2, 2]
        kicked[1, 2] = kicked[2, 1] = avg_cross * (s[1, 1] - s[2, 2]) + (
            avg_cos_sq - avg_sin_sq
        ) * s[1, 2]
        second = counter @ kicked @ counter.T
        second = 0.5 * (second + second.T)
    return CollectiveMoments(mean=mean, second=second)


def light_sensitivity(chi_tp: float, omega: float, tau: float, steps: int, N: int) -> float:
    """Frequency variance Var(J_x(T)) / (d<J_x(T)>/domega)^2 after the run."""
    T = steps * tau
    slope = math.sin(2.0 * omega * T)
    if abs(slope) < 1e-12:
        raise DegenerateFrequencyError(
            f"frequency derivative vanishes at sin(2 omega T) = {slope:.3e}"
        )
    state = propagate_collective_moments(chi_tp, omega, tau, steps, N)
    variance = float(state.second[0, 0] - state.mean[0] ** 2)
    derivative = -N * T * slope
    return variance / (derivative * derivative)
