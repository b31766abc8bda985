"""Closed-form dynamics of one sensing qubit: free evolution, weak measurement, readout noise.

The qubit starts in |+> and stays in the sigma_x-sigma_y plane, so its state is
the pair (r, phi). One protocol step rotates the state by -2*omega*tau and applies
one two-outcome weak measurement of sigma_x with strength g; outcome bit x = 0
corresponds to the Kraus operator K_plus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateFrequencyError

G_MAX = math.pi / 4

MODE_WEAK_ONLY = "weak_only"
MODE_WEAK_WITH_STRONG = "weak_with_strong"
MODES = (MODE_WEAK_ONLY, MODE_WEAK_WITH_STRONG)

_SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_IDENT = np.eye(2, dtype=complex)


def _check_g(g: float, include_max: bool = True, allow_zero: bool = False) -> None:
    lo_ok = g >= 0.0 if allow_zero else g > 0.0
    hi_ok = g <= G_MAX if include_max else g < G_MAX
    if not (lo_ok and hi_ok):
        lo = "[0" if allow_zero else "(0"
        hi = "pi/4]" if include_max else "pi/4)"
        raise ValueError(f"g={g} outside {lo}, {hi}")


@dataclass(frozen=True)
class ProtocolParams:
    """All knobs of one experiment.

    g: measurement strength in (0, pi/4]; tau: measurement period, s;
    T: total interrogation time, s; N: qubit count; delta_omega: prior
    width, rad/s; p_e: readout bit-flip probability in [0, 1/2];
    mode: 'weak_only' or 'weak_with_strong'.
    """

    g: float
    tau: float
    T: float
    N: int
    delta_omega: float
    p_e: float = 0.0
    mode: str = MODE_WEAK_WITH_STRONG

    def __post_init__(self):
        _check_g(self.g)
        if self.tau <= 0.0:
            raise ValueError(f"tau={self.tau} must be positive")
        if self.T < self.tau:
            raise ValueError(f"T={self.T} must be >= tau={self.tau}")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N={self.N} must be a positive integer")
        if self.delta_omega <= 0.0:
            raise ValueError(f"delta_omega={self.delta_omega} must be positive")
        # aliasing guard: phase per step stays within [0, pi] (tau <= pi/2*delta_omega)
        if self.delta_omega * self.tau > math.pi / 2 * (1.0 + 1e-12):
            raise ValueError(
                f"delta_omega*tau={self.delta_omega * self.tau:.6g} exceeds pi/2; "
                "reduce tau or the prior width"
            )
        if not 0.0 <= self.p_e <= 0.5:
            raise ValueError(f"p_e={self.p_e} outside [0, 1/2]")
        if self.mode not in MODES:
            raise ValueError(f"mode={self.mode!r} not one of {MODES}")

    @property
    def m(self) -> int:
        """Number of measurements in [0, T]."""
        return int(math.floor(self.T / self.tau + 1e-9))

    @classmethod
    def from_prior(cls, g: float, T: float, N: int, delta_omega: float, **kwargs) -> "ProtocolParams":
        """Construct with the aliasing-free period tau = pi/(2*delta_omega)."""
        tau = math.pi / (2.0 * delta_omega)
        return cls(g=g, tau=tau, T=T, N=N, delta_omega=delta_omega, **kwargs)


def params_digest(params: "ProtocolParams") -> str:
    """Short stable fingerprint of a parameter set, for record headers and replay files."""
    import hashlib

    text = (
        f"g={params.g!r};tau={params.tau!r};T={params.T!r};N={params.N!r};"
        f"delta_omega={params.delta_omega!r};p_e={params.p_e!r};mode={params.mode}"
    )
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def wrap_angle(phi: float) -> float:
    """Wrap to (-pi, pi]."""
    w = math.remainder(phi, 2.0 * math.pi)
    if w <= -math.pi:
        w += 2.0 * math.pi
    return w


@dataclass(frozen=True)
class PlanarState:
    """Bloch vector confined to the equatorial plane: radius r, angle phi."""

    r: float = 1.0
    phi: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.r <= 1.0 + 1e-12:
            raise ValueError(f"r={self.r} outside [0, 1]")
        object.__setattr__(self, "phi", wrap_angle(self.phi))

    @property
    def rx(self) -> float:
        return self.r * math.cos(self.phi)

    @property
    def ry(self) -> float:
        return self.r * math.sin(self.phi)


@dataclass(frozen=True)
class KrausPair:
    k_plus: np.ndarray
    k_minus: np.ndarray


def kraus_pair(g: float) -> KrausPair:
    """K_pm = (cos(g) I +- sin(g) sigma_x)/sqrt(2)."""
    _check_g(g)
    kp = (math.cos(g) * _IDENT + math.sin(g) * _SIGMA_X) / math.sqrt(2.0)
    km = (math.cos(g) * _IDENT - math.sin(g) * _SIGMA_X) / math.sqrt(2.0)
    return KrausPair(k_plus=kp, k_minus=km)


def weak_meas_probabilities(state: PlanarState, g: float, p_e: float = 0.0) -> tuple[float, float]:
    """Outcome probabilities (p0, p1) of one weak sigma_x measurement with readout flips."""
    _check_g(g, allow_zero=True)
    if not 0.0 <= p_e <= 0.5:
        raise ValueError(f"p_e={p_e} outside [0, 1/2]")
    signal = (1.0 - 2.0 * p_e) * math.sin(2.0 * g) * state.rx
    p0 = 0.5 * (1.0 + signal)
    return p0, 1.0 - p0


def planar_state_update(
    state: PlanarState,
    outcome: int,
    g: float,
    omega: float,
    tau: float,
    p_e: float = 0.0,
) -> PlanarState:
    """Back-action of one weak measurement outcome, then free rotation by -2*omega*tau."""
    if outcome not in (0, 1):
        raise ValueError(f"outcome={outcome} must be 0 or 1")
    _check_g(g, allow_zero=True)
    a = state.rx
    b = state.ry
    sign = 1.0 if outcome == 0 else -1.0
    u = sign * (1.0 - 2.0 * p_e) * math.sin(2.0 * g)
    denom = 1.0 + u * a  # equals twice the outcome probability
    a = (a + u) / denom
    b = b * math.cos(2.0 * g) / denom
    c = math.cos(2.0 * omega * tau)
    s = math.sin(2.0 * omega * tau)
    a, b = a * c + b * s, -a * s + b * c
    if p_e == 0.0 and state.r == 1.0:
        # pure states stay pure under the Kraus pair; pin r to kill roundoff drift
        return PlanarState(r=1.0, phi=math.atan2(b, a))
    return PlanarState(r=min(math.hypot(a, b), 1.0), phi=math.atan2(b, a))


def dephasing_rate(g: float, tau: float) -> float:
    """Averaged-channel dephasing rate gamma = -ln(cos 2g)/(2 tau); inf at g = pi/4."""
    _check_g(g)
    if tau <= 0.0:
        raise ValueError(f"tau={tau} must be positive")
    if g >= G_MAX:
        return math.inf
    return -math.log(math.cos(2.0 * g)) / (2.0 * tau)


@dataclass(frozen=True)
class AveragedDynamics:
    """Closed-form outcome-averaged evolution of the sigma_x component.

    r_x at the k-th measurement (time k*tau, rotation applied before each
    measurement) is cos(2g)^(k/2) * A * cos(alpha*k + phi0), and
    p(x_k=0|omega) = (1 + sin(2g) * r_x(k*tau))/2.
    """

    alpha: float
    A: float
    phi0: float
    gamma: float
    g: float = field(repr=False, default=0.0)

    def rx(self, k) -> float | np.ndarray:
        k = np.asarray(k, dtype=float)
        out = math.cos(2.0 * self.g) ** (k / 2.0) * self.A * np.cos(self.alpha * k + self.phi0)
        return out if out.ndim else float(out)

    def p0(self, k) -> float | np.ndarray:
        return 0.5 * (1.0 + math.sin(2.0 * self.g) * self.rx(k))


def averaged_dynamics(g: float, omega: float, tau: float) -> AveragedDynamics:
    _check_g(g, include_max=False)
    if tau <= 0.0:
        raise ValueError(f"tau={tau} must be positive")
    c2g = math.cos(2.0 * g)
    s2wt = math.sin(2.0 * omega * tau)
    c2wt = math.cos(2.0 * omega * tau)
    denom = c2g - math.cos(g) ** 4 * c2wt * c2wt
    if s2wt == 0.0 or denom <= 0.0:
        raise DegenerateFrequencyError(
            f"sin(2*omega*tau)={s2wt:.3g}: averaged dynamics degenerate at omega*tau={omega * tau:.6g}"
        )
    alpha = math.acos(math.cos(g) ** 2 * c2wt / math.sqrt(c2g))
    amp = math.sqrt(c2g * s2wt * s2wt / denom)
    phi0 = math.asin(-math.sin(g) ** 2 * c2wt / math.sqrt(c2g * s2wt * s2wt))
    return AveragedDynamics(
        alpha=alpha, A=amp, phi0=phi0, gamma=dephasing_rate(g, tau), g=g
    )
