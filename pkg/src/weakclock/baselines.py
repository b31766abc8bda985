"""Comparison protocols: an optimal-measurement bound for a coherent spin
state read out after a single free evolution, and a cascaded multi-ensemble
Ramsey scheme with halving interrogation times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import NumericError, SizeGuardError
from .estimation import Prior

_OCI_MAX_N = 512
_EIGENVALUE_FLOOR = 1e-12
_RESIDUAL_TOL = 1e-8
_GRID_MOVE_TOL = 1e-3
_MAX_GRID_DOUBLINGS = 4


@dataclass(frozen=True)
class SymmetricCSS:
    """Coherent spin state in the symmetric subspace, indexed by excitation number."""

    amplitudes: np.ndarray

    def __post_init__(self):
        if self.amplitudes.ndim != 1:
            raise ValueError("amplitudes must be a 1-D vector over excitation number")
        norm = float(np.sum(np.abs(self.amplitudes) ** 2))
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state norm deviates from 1 by {abs(norm - 1.0):.3e}")

    @property
    def dim(self) -> int:
        return len(self.amplitudes)


def _sqrt_binomial_weights(N: int) -> np.ndarray:
    """sqrt(C(N, k)/2^N) for k = 0..N, in log space so N = 512 stays finite."""
    k = np.arange(N + 1)
    log_c = (
        math.lgamma(N + 1)
        - np.array([math.lgamma(j + 1) + math.lgamma(N - j + 1) for j in k])
    )
    return np.exp(0.5 * (log_c - N * math.log(2.0)))


def symmetric_css(N: int, omega: float, T: float) -> SymmetricCSS:
    """The post-evolution product state, collapsed onto excitation-number amplitudes."""
    if N < 1:
        raise ValueError(f"need at least one qubit, got N={N}")
    weights = _sqrt_binomial_weights(N)
    phases = np.exp(-2j * omega * T * np.arange(N + 1))
    return SymmetricCSS(amplitudes=weights * phases)


def oci_bound(N: int, T: float, delta_omega: float) -> float:
    """Minimum Bayesian MSE of a coherent spin state over all measurements.

    The prior is uniform and centered on zero mean, which leaves the result
    shift-invariant. The prior-averaged state and its frequency-weighted
    companion are built in the symmetric subspace, the optimality operator L
    is solved elementwise in the averaged state's eigenbasis, and the bound
    is var(prior) - Tr(L^2 rho_bar).
    """
    if N < 1:
        raise ValueError(f"need at least one qubit, got N={N}")
    if N > _OCI_MAX_N:
        raise SizeGuardError(
            f"oci_bound solves dense (N+1)^2 linear algebra; N={N} exceeds {_OCI_MAX_N}"
        )
    if not (math.isfinite(T) and math.isfinite(delta_omega)) or T < 0 or delta_omega <= 0:
        raise ValueError("oci_bound needs finite T >= 0 and delta_omega > 0")

    weights = _sqrt_binomial_weights(N)
    S = np.outer(weights, weights)
    d = np.arange(N + 1)[:, None] - np.arange(N + 1)[None, :]
    u = delta_omega * T * d

    rho = S * np.sinc(u / math.pi)
    with np.errstate(divide="ignore", invalid="ignore"):
        kernel = -1j * (np.sin(u) - u * np.cos(u)) / (
            2.0 * delta_omega * T * T * d.astype(float) ** 2
        )
    kernel[d == 0] = 0.0
    if T == 0.0:
        kernel[:] = 0.0
    rho_prime = S * kernel

    if np.abs(rho - rho.T).max() > 1e-10:
        raise NumericError("prior-averaged state lost Hermiticity")
    if np.abs(rho_prime - rho_prime.conj().T).max() > 1e-10:
        raise NumericError("frequency-weighted state lost Hermiticity")

    p, V = np.linalg.eigh(rho)
    rho_prime_t = V.conj().T @ rho_prime @ V
    denom = p[:, None] + p[None, :]
    supported = denom > _EIGENVALUE_FLOOR * p.max()
    L = np.where(supported, 2.0 * rho_prime_t / np.where(supported, denom, 1.0), 0.0)

    prime_norm = np.linalg.norm(rho_prime_t)
    if prime_norm > 0.0:
        residual = np.linalg.norm(0.5 * (L * denom) - rho_prime_t)
        if residual > _RESIDUAL_TOL * prime_norm:
            raise NumericError(
                f"optimality operator residual {residual:.3e} exceeds "
                f"{_RESIDUAL_TOL:.0e} of {prime_norm:.3e}"
            )

    variance = delta_omega * delta_omega / 12.0
    gain = float(np.real(np.sum(np.abs(L) ** 2 * p[None, :])))
    bound = variance - gain
    if bound < -1e-10 * variance:
        raise NumericError(f"bound fell below zero: {bound:.3e}")
    return max(bound, 0.0)


@dataclass(frozen=True)
class CascadedPlan:
    """Partition of N qubits into M ensembles with halving interrogation times."""

    M: int
    sizes: Tuple[int, ...]
    times: Tuple[float, ...]

    def __post_init__(self):
        if self.M < 1 or len(self.sizes) != self.M or len(self.times) != self.M:
            raise ValueError("plan needs M >= 1 matching sizes and times")
        if any(n < 1 for n in self.sizes):
            raise ValueError("every ensemble needs at least one qubit")
        for i in range(1, self.M):
            if abs(self.times[i] - 0.5 * self.times[i - 1]) > 1e-12 * self.times[0]:
                raise ValueError("interrogation times must halve per ensemble")


def cascaded_plan(N: int, T: float, M: int) -> CascadedPlan:
    """Near-equal partition; the longer-time ensembles absorb any remainder."""
    if M < 1 or M > N:
        raise ValueError(f"need 1 <= M <= N, got M={M}, N={N}")
    base, extra = divmod(N, M)
    sizes = tuple(base + (1 if i < extra else 0) for i in range(M))
    times = tuple(T / 2**i for i in range(M))
    return CascadedPlan(M=M, sizes=sizes, times=times)


@dataclass(frozen=True)
class CascadedFisher:
    total: float
    per_ensemble: np.ndarray


def cascaded_fisher(plan: CascadedPlan, T: float) -> CascadedFisher:
    """Closed-form information of an equal partition, (16NT^2/3M)(1 - 4^-M).

    Also reports the additive per-ensemble contributions 4 N_i T_i^2, whose
    sum equals the closed form when the partition is exactly equal.
    """
    if len(set(plan.sizes)) != 1:
        raise ValueError("closed form holds for the equal partition only")
    if abs(plan.times[0] - T) > 1e-12 * max(T, 1.0):
        raise ValueError(f"plan starts at T={plan.times[0]}, called with T={T}")
    N = sum(plan.sizes)
    M = plan.M
    total = (16.0 * N * T * T / (3.0 * M)) * (1.0 - 0.25**M)
    per = 4.0 * np.asarray(plan.sizes, dtype=float) * np.asarray(plan.times) ** 2
    return CascadedFisher(total=total, per_ensemble=per)


@dataclass(frozen=True)
class CascadedBmseResult:
    bmse: float
    stderr: float
    chosen_M: int
    degenerate: bool = False


def _cascaded_bmse_for_plan(plan, omega_true, prior, seed, grid_size):
    """Simulate projective per-ensemble readouts and the joint posterior mean."""
    n_rep = len(omega_true)
    sizes = np.asarray(plan.sizes)
    times = np.asarray(plan.times)
    rng = np.random.default_rng(np.random.SeedSequence((seed, plan.M)))
    p_true = 0.5 * (1.0 + np.cos(2.0 * omega_true[:, None] * times[None, :]))
    counts = rng.binomial(sizes[None, :], p_true)

    grid = grid_size
    means = None
    for _ in range(_MAX_GRID_DOUBLINGS + 1):
        omegas = prior.lo + (np.arange(grid) + 0.5) * (prior.width / grid)
        p = 0.5 * (1.0 + np.cos(2.0 * omegas[None, :] * times[:, None]))
        logp = np.log(np.clip(p, 1e-300, None))
        log1m = np.log(np.clip(1.0 - p, 1e-300, None))
        loglik = counts @ logp + (sizes[None, :] - counts) @ log1m
        peak = loglik.max(axis=1, keepdims=True)
        weights = np.exp(loglik - peak)
        new_means = (weights @ omegas) / weights.sum(axis=1)
        if means is not None and np.max(np.abs(new_means - means)) < _GRID_MOVE_TOL * prior.width:
            means = new_means
            break
        means = new_means
        grid *= 2

    squared = (means - omega_true) ** 2
    return float(squared.mean()), float(squared.std(ddof=1) / math.sqrt(n_rep))


def cascaded_bmse(
    N: int,
    T: float,
    prior: Prior,
    seed: int,
    n_rep: int = 500,
    grid_size: int = 4096,
) -> CascadedBmseResult:
    """Best measured Bayesian MSE of the cascaded scheme over nearby depths.

    The starting depth is the smallest M whose shortest-time ensemble is free
    of phase slips, delta_omega T / 2^(M-1) <= pi; the scan also measures
    M - 1 and M + 1 and keeps the best. When no depth fits into N qubits the
    result is the prior variance, flagged.
    """
    if N < 1:
        raise ValueError(f"need at least one qubit, got N={N}")
    if n_rep < 100:
        raise ValueError(f"cascaded_bmse needs n_rep >= 100, got {n_rep}")
    ratio = prior.width * T / math.pi
    base_M = 1 if ratio <= 1.0 else 1 + math.ceil(math.log2(ratio) - 1e-12)
    if base_M > N:
        return CascadedBmseResult(
            bmse=prior.variance, stderr=0.0, chosen_M=0, degenerate=True
        )

    rng = np.random.default_rng(np.random.SeedSequence((seed, 1 << 32)))
    u = (np.arange(n_rep) + rng.random(n_rep)) / n_rep
    omega_true = prior.lo + prior.width * u

    best = None
    for M in (base_M - 1, base_M, base_M + 1):
        if M < 1 or M > N:
            continue
        plan = cascaded_plan(N, T, M)
        bmse, stderr = _cascaded_bmse_for_plan(plan, omega_true, prior, seed, grid_size)
        if best is None or bmse < best[0]:
            best = (bmse, stderr, M)
    return CascadedBmseResult(bmse=best[0], stderr=best[1], chosen_M=best[2])
