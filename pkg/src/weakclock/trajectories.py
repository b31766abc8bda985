"""Sampling, enumeration, and re-scoring of weak-measurement records.

Vectorized kernels work on arrays shaped (trajectory, qubit); the public
single-record operations wrap them. All sampling is split into fixed-size
chunks seeded by (root seed, chunk index), so outputs do not depend on the
worker count.
"""

from __future__ import annotations

import base64
import math
from dataclasses import dataclass

import numpy as np

from .core import MODE_WEAK_WITH_STRONG, ProtocolParams, params_digest
from .errors import SizeGuardError
from .parallel import CHUNK_SIZE, chunk_bounds, map_chunks

ENUMERATION_GUARD = 20  # max N*m for exhaustive outcome enumeration
MEMORY_GUARD_BYTES = 8 * 10**9


@dataclass(frozen=True)
class Trajectory:
    """Measurement record of one run: per-qubit weak bits plus optional strong bits."""

    weak_outcomes: np.ndarray  # uint8, shape (N, n_weak)
    strong_outcomes: np.ndarray | None  # uint8, shape (N,), weak-with-strong only
    seed: int

    def __post_init__(self):
        if self.weak_outcomes.ndim != 2:
            raise ValueError("weak_outcomes must be 2-D (qubit, step)")
        if self.strong_outcomes is not None and len(self.strong_outcomes) != len(self.weak_outcomes):
            raise ValueError("strong_outcomes length must match qubit count")

    def to_json(self, params: ProtocolParams) -> dict:
        """Compact replay form: bit-packed outcomes, seed, and a params fingerprint."""
        n, n_weak = self.weak_outcomes.shape
        doc = {
            "n_qubits": n,
            "n_weak": n_weak,
            "weak_bits": base64.b64encode(np.packbits(self.weak_outcomes)).decode(),
            "seed": self.seed,
            "params_digest": params_digest(params),
        }
        if self.strong_outcomes is not None:
            doc["strong_bits"] = base64.b64encode(np.packbits(self.strong_outcomes)).decode()
        return doc

    @classmethod
    def from_json(cls, doc: dict, params: ProtocolParams) -> "Trajectory":
        if doc["params_digest"] != params_digest(params):
            raise ValueError("trajectory was recorded under different protocol parameters")
        n, n_weak = doc["n_qubits"], doc["n_weak"]
        weak = np.unpackbits(
            np.frombuffer(base64.b64decode(doc["weak_bits"]), dtype=np.uint8),
            count=n * n_weak,
        ).reshape(n, n_weak)
        strong = None
        if "strong_bits" in doc:
            strong = np.unpackbits(
                np.frombuffer(base64.b64decode(doc["strong_bits"]), dtype=np.uint8), count=n
            )
        return cls(weak_outcomes=weak, strong_outcomes=strong, seed=doc["seed"])


@dataclass(frozen=True)
class ScoredLikelihood:
    log_likelihood: float
    score: float  # d log-likelihood / d omega, seconds
    degenerate: bool = False  # a step probability was exactly 0 at the queried omega


def n_weak_steps(params: ProtocolParams) -> int:
    if params.mode == MODE_WEAK_WITH_STRONG:
        return params.m - 1
    return params.m


def _sample_block(params, omega, n_traj, n_qubits, rng, p_e_strong=0.0):
    """Sample outcomes for a block; omega is a scalar or per-trajectory array."""
    omega = np.asarray(omega, dtype=float)
    angle = 2.0 * omega * params.tau
    cos_t = np.cos(angle)
    sin_t = np.sin(angle)
    if omega.ndim:
        cos_t = cos_t[:, None]
        sin_t = sin_t[:, None]
    u_plus = (1.0 - 2.0 * params.p_e) * math.sin(2.0 * params.g)
    cos2g = math.cos(2.0 * params.g)

    shape = (n_traj, n_qubits)
    a = np.ones(shape)
    b = np.zeros(shape)
    n_weak = n_weak_steps(params)
    outcomes = np.empty((n_traj, n_qubits, n_weak), dtype=np.uint8)
    for k in range(n_weak):
        a, b = a * cos_t + b * sin_t, -a * sin_t + b * cos_t
        p0 = 0.5 * (1.0 + u_plus * a)
        x = rng.random(shape) >= p0
        outcomes[:, :, k] = x
        u = np.where(x, -u_plus, u_plus)
        denom = 1.0 + u * a
        a = (a + u) / denom
        b = b * cos2g / denom

    strong = None
    if params.mode == MODE_WEAK_WITH_STRONG:
        a = a * cos_t + b * sin_t
        p0 = 0.5 * (1.0 + (1.0 - 2.0 * p_e_strong) * a)
        strong = (rng.random(shape) >= p0).astype(np.uint8)
    return outcomes, strong


def _sample_and_score_block(params, omega, n_traj, n_qubits, rng, p_e_strong=0.0):
    """Sample a block and accumulate the analytic score in one pass.

    Returns per-trajectory scores summed over the block's qubits, d log p / d omega.
    """
    omega = np.asarray(omega, dtype=float)
    angle = 2.0 * omega * params.tau
    cos_t = np.cos(angle)
    sin_t = np.sin(angle)
    if omega.ndim:
        cos_t = cos_t[:, None]
        sin_t = sin_t[:, None]
    two_tau = 2.0 * params.tau
    u_plus = (1.0 - 2.0 * params.p_e) * math.sin(2.0 * params.g)
    cos2g = math.cos(2.0 * params.g)

    shape = (n_traj, n_qubits)
    a = np.ones(shape)
    b = np.zeros(shape)
    da = np.zeros(shape)
    db = np.zeros(shape)
    score = np.zeros(shape)
    for _ in range(n_weak_steps(params)):
        a, b = a * cos_t + b * sin_t, -a * sin_t + b * cos_t
        da, db = da * cos_t + db * sin_t + two_tau * b, -da * sin_t + db * cos_t - two_tau * a
        p0 = 0.5 * (1.0 + u_plus * a)
        x = rng.random(shape) >= p0
        u = np.where(x, -u_plus, u_plus)
        denom = 1.0 + u * a
        score += u * da / denom
        da, db = da * (1.0 - u * u) / (denom * denom), cos2g * (db * denom - b * u * da) / (denom * denom)
        a = (a + u) / denom
        b = b * cos2g / denom

    if params.mode == MODE_WEAK_WITH_STRONG:
        a, b = a * cos_t + b * sin_t, -a * sin_t + b * cos_t
        da = da * cos_t + db * sin_t + two_tau * b
        r = 1.0 - 2.0 * p_e_strong
        p0 = 0.5 * (1.0 + r * a)
        x = rng.random(shape) >= p0
        sgn = np.where(x, -r, r)
        score += 0.5 * sgn * da / (0.5 * (1.0 + sgn * a))
    return score.sum(axis=1)


def sample_scores(params, omega, n_traj, seed, workers=None, n_qubits=1, p_e_strong=0.0):
    """Scores of n_traj freshly sampled records at the true omega (chunk-deterministic)."""
    omega = np.asarray(omega, dtype=float)
    bounds = chunk_bounds(n_traj, CHUNK_SIZE)

    def run(c):
        lo, hi = bounds[c]
        rng = np.random.default_rng(np.random.SeedSequence((seed, c)))
        om = omega if omega.ndim == 0 else omega[lo:hi]
        return _sample_and_score_block(params, om, hi - lo, n_qubits, rng, p_e_strong)

    return np.concatenate(map_chunks(run, len(bounds), workers))


def sample_outcomes(params, omega, n_traj, seed, workers=None, n_qubits=None, p_e_strong=0.0):
    """Outcome arrays for n_traj records: (outcomes (R, nq, n_weak), strong (R, nq) or None)."""
    nq = params.N if n_qubits is None else n_qubits
    n_weak = n_weak_steps(params)
    if n_traj * nq * max(n_weak, 1) > MEMORY_GUARD_BYTES:
        raise SizeGuardError(
            f"{n_traj} trajectories x {nq} qubits x {n_weak} steps exceeds the memory guard"
        )
    omega = np.asarray(omega, dtype=float)
    bounds = chunk_bounds(n_traj, CHUNK_SIZE)

    def run(c):
        lo, hi = bounds[c]
        rng = np.random.default_rng(np.random.SeedSequence((seed, c)))
        om = omega if omega.ndim == 0 else omega[lo:hi]
        return _sample_block(params, om, hi - lo, nq, rng, p_e_strong)

    parts = map_chunks(run, len(bounds), workers)
    outcomes = np.concatenate([p[0] for p in parts])
    strong = None
    if parts[0][1] is not None:
        strong = np.concatenate([p[1] for p in parts])
    return outcomes, strong


def replay_loglik_score(outcomes, strong, params, omega, p_e_strong=0.0, need_score=True):
    """Replay records at candidate omega: log-likelihood and score per leading index.

    outcomes: (..., nq, n_weak); strong: (..., nq) or None; omega broadcasts
    against the leading axes. Both returns have the broadcast leading shape.
    With need_score=False the derivative recursion is skipped and the score
    comes back as zeros (estimator search paths only need log-likelihoods).
    """
    outcomes = np.asarray(outcomes)
    omega = np.asarray(omega, dtype=float)
    prefix = np.broadcast_shapes(outcomes.shape[:-2], omega.shape)
    nq = outcomes.shape[-2]
    n_weak = outcomes.shape[-1]

    angle = 2.0 * omega * params.tau
    cos_t = np.broadcast_to(np.cos(angle), prefix)[..., None]
    sin_t = np.broadcast_to(np.sin(angle), prefix)[..., None]
    two_tau = 2.0 * params.tau
    u_plus = (1.0 - 2.0 * params.p_e) * math.sin(2.0 * params.g)
    cos2g = math.cos(2.0 * params.g)

    shape = prefix + (nq,)
    a = np.ones(shape)
    b = np.zeros(shape)
    loglik = np.zeros(shape)
    if need_score:
        da = np.zeros(shape)
        db = np.zeros(shape)
        score = np.zeros(shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        for k in range(n_weak):
            a, b = a * cos_t + b * sin_t, -a * sin_t + b * cos_t
            if need_score:
                da, db = da * cos_t + db * sin_t + two_tau * b, -da * sin_t + db * cos_t - two_tau * a
            x = outcomes[..., k]
            u = np.where(x, -u_plus, u_plus)
            denom = 1.0 + u * a
            loglik += np.log(0.5 * denom)
            if need_score:
                score += u * da / denom
                da, db = (
                    da * (1.0 - u * u) / (denom * denom),
                    cos2g * (db * denom - b * u * da) / (denom * denom),
                )
            a = (a + u) / denom
            b = b * cos2g / denom

        if strong is not None:
            a, b = a * cos_t + b * sin_t, -a * sin_t + b * cos_t
            r = 1.0 - 2.0 * p_e_strong
            sgn = np.where(np.asarray(strong), -r, r)
            p = 0.5 * (1.0 + sgn * a)
            loglik += np.log(p)
            if need_score:
                da = da * cos_t + db * sin_t + two_tau * b
                score += 0.5 * sgn * da / p

    loglik = loglik.sum(axis=-1)
    # a zero-probability branch poisons later steps with nan; the record as a
    # whole still has likelihood zero
    loglik = np.where(np.isnan(loglik), -np.inf, loglik)
    return loglik, score.sum(axis=-1) if need_score else np.zeros(prefix)


def simulate_trajectory(params: ProtocolParams, omega: float, seed: int) -> Trajectory:
    """Sample one full record of all N qubits; identical (params, omega, seed) give identical bits."""
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0)))
    outcomes, strong = _sample_block(params, float(omega), 1, params.N, rng)
    return Trajectory(
        weak_outcomes=outcomes[0],
        strong_outcomes=None if strong is None else strong[0],
        seed=seed,
    )


def score_trajectory(traj: Trajectory, omega: float, params: ProtocolParams) -> ScoredLikelihood:
    """Exact log-likelihood and its analytic omega-derivative, by replaying the recursion."""
    expected = n_weak_steps(params)
    if traj.weak_outcomes.shape != (params.N, expected):
        raise ValueError(
            f"record shape {traj.weak_outcomes.shape} does not match (N={params.N}, steps={expected})"
        )
    strong = traj.strong_outcomes
    if (strong is None) == (params.mode == MODE_WEAK_WITH_STRONG):
        raise ValueError(f"strong outcomes inconsistent with mode={params.mode}")
    loglik, score = replay_loglik_score(
        traj.weak_outcomes[None], None if strong is None else strong[None], params, float(omega)
    )
    ll = float(loglik[0])
    return ScoredLikelihood(
        log_likelihood=ll, score=float(score[0]), degenerate=not math.isfinite(ll)
    )


def enumerate_outcome_distribution(params: ProtocolParams, omega: float, max_steps: int | None = None):
    """Exact probabilities of every outcome string (qubit-major bit order).

    Refuses when N*m exceeds the enumeration guard. The per-qubit string has
    one bit per measurement, the strong bit last in weak-with-strong mode.
    """
    m = params.m if max_steps is None else min(params.m, max_steps)
    if params.N * m > ENUMERATION_GUARD:
        raise SizeGuardError(
            f"N*m = {params.N * m} exceeds the enumeration guard {ENUMERATION_GUARD}"
        )
    single = _enumerate_single_qubit(params, float(omega), m)
    probs = single
    for _ in range(params.N - 1):
        probs = np.kron(probs, single)
    total_bits = params.N * m
    strings = [format(i, f"0{total_bits}b") for i in range(len(probs))]
    return list(zip(strings, probs.tolist()))


def _enumerate_single_qubit(params, omega, m):
    """Probability vector over the 2^m single-qubit strings, first measurement = MSB."""
    cos_t = math.cos(2.0 * omega * params.tau)
    sin_t = math.sin(2.0 * omega * params.tau)
    u_plus = (1.0 - 2.0 * params.p_e) * math.sin(2.0 * params.g)
    cos2g = math.cos(2.0 * params.g)
    strong_last = params.mode == MODE_WEAK_WITH_STRONG

    def branch(first, second):
        # newest outcome becomes the least significant bit
        return np.stack([first, second], axis=-1).reshape(-1)

    a = np.array([1.0])
    b = np.array([0.0])
    prob = np.array([1.0])
    for k in range(m):
        a, b = a * cos_t + b * sin_t, -a * sin_t + b * cos_t
        if strong_last and k == m - 1:
            p0 = 0.5 * (1.0 + a)
            prob = branch(prob * p0, prob * (1.0 - p0))
            a = branch(a, a)
            b = branch(b, b)
            continue
        p0 = 0.5 * (1.0 + u_plus * a)
        p1 = 1.0 - p0
        with np.errstate(divide="ignore", invalid="ignore"):
            a_next = branch((a + u_plus) / (2.0 * p0), (a - u_plus) / (2.0 * p1))
            b_next = branch(b * cos2g / (2.0 * p0), b * cos2g / (2.0 * p1))
        prob = branch(prob * p0, prob * p1)
        a = np.nan_to_num(a_next)
        b = np.nan_to_num(b_next)
    return prob
