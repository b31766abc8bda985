import math

import numpy as np
import pytest

from weakclock.baselines import (
    CascadedPlan,
    cascaded_bmse,
    cascaded_fisher,
    cascaded_plan,
    oci_bound,
    symmetric_css,
)
from weakclock.core import MODE_WEAK_WITH_STRONG, ProtocolParams
from weakclock.errors import SizeGuardError
from weakclock.estimation import Prior, bmse_experiment


class TestSymmetricCSS:
    def test_small_state_amplitudes(self):
        state = symmetric_css(2, 0.3, 1.0)
        weights = np.sqrt(np.array([1.0, 2.0, 1.0]) / 4.0)
        expected = weights * np.exp(-2j * 0.3 * np.arange(3))
        assert state.dim == 3
        assert np.allclose(state.amplitudes, expected, atol=1e-14)

    def test_norm_survives_large_ensembles(self):
        for n in (1, 5, 64, 512):
            state = symmetric_css(n, 0.7, 2.0)
            assert state.dim == n + 1
            norm = float(np.sum(np.abs(state.amplitudes) ** 2))
            assert abs(norm - 1.0) < 1e-12

    def test_invalid_states_rejected(self):
        from weakclock.baselines import SymmetricCSS

        with pytest.raises(ValueError, match="norm"):
            SymmetricCSS(amplitudes=np.array([0.5, 0.5]))
        with pytest.raises(ValueError, match="1-D"):
            SymmetricCSS(amplitudes=np.eye(2, dtype=complex))
        with pytest.raises(ValueError, match="at least one"):
            symmetric_css(0, 0.0, 1.0)


class TestOciBound:
    def test_single_qubit_matches_measurement_search(self):
        # a dense sweep over projective qubit measurement axes can only do
        # worse than the bound, and the best axis should get within 1%;
        # value frozen from a polished Nelder-Mead search: 0.060657690039754
        T, dw = 1.0, 1.0
        bound = oci_bound(1, T, dw)
        assert bound == pytest.approx(0.060657690039754, rel=1e-9)

        weights = np.full(2, math.sqrt(0.5))
        d = np.arange(2)[:, None] - np.arange(2)[None, :]
        u = dw * T * d
        rho = np.outer(weights, weights) * np.sinc(u / math.pi)
        with np.errstate(divide="ignore", invalid="ignore"):
            kern = -1j * (np.sin(u) - u * np.cos(u)) / (2.0 * dw * T * T * d.astype(float) ** 2)
        kern[d == 0] = 0.0
        rho_prime = np.outer(weights, weights) * kern

        theta = np.linspace(0.0, math.pi, 181)
        phi = np.linspace(0.0, 2.0 * math.pi, 361)
        tt, pp = np.meshgrid(theta, phi, indexing="ij")
        axis = np.stack(
            [np.sin(tt) * np.cos(pp), np.sin(tt) * np.sin(pp), np.cos(tt)], axis=-1
        )
        paulis = np.array(
            [[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex
        )
        v = np.real(np.einsum("kab,ba->k", paulis, rho))
        v_prime = np.real(np.einsum("kab,ba->k", paulis, rho_prime))
        a = axis @ v
        b = axis @ v_prime
        gain = b * b / np.clip(1.0 - a * a, 1e-15, None)
        best = float((dw * dw / 12.0 - gain).min())
        assert best >= bound - 1e-12
        assert best <= bound * 1.01

    def test_frozen_value(self):
        assert oci_bound(4, 1.0, 1.0) == pytest.approx(0.03277891732798929, rel=1e-9)

    def test_converges_to_prior_variance_at_long_times(self):
        dw = 1.0
        assert oci_bound(4, 200.0, dw) == pytest.approx(dw * dw / 12.0, rel=0.05)

    def test_no_evolution_gives_prior_variance(self):
        dw = 1.0
        assert oci_bound(4, 0.0, dw) == pytest.approx(dw * dw / 12.0, rel=1e-12)
        assert oci_bound(4, 1e-9, dw) == pytest.approx(dw * dw / 12.0, rel=1e-9)

    def test_degrades_sharply_past_phase_slip_point(self):
        dw = math.pi
        values = [oci_bound(64, dwt / dw, dw) for dwt in (1.0, math.pi, 2 * math.pi, 4 * math.pi)]
        assert all(b > a for a, b in zip(values, values[1:]))
        # near the plateau by two phase-slip periods
        assert values[-1] > 0.9 * dw * dw / 12.0

    def test_bounded_by_prior_variance_everywhere(self):
        for n in (1, 3, 16, 128):
            for dwt in (0.3, 1.0, math.pi, 10.0, 100.0):
                dw = 2.0
                value = oci_bound(n, dwt / dw, dw)
                assert 0.0 <= value <= dw * dw / 12.0 + 1e-12

    def test_improves_with_more_qubits(self):
        values = [oci_bound(n, 1.0, 1.0) for n in (1, 2, 4, 8, 16)]
        assert all(b < a for a, b in zip(values, values[1:]))

    def test_scales_as_prior_width_squared(self):
        # omega enters only through omega*T, so halving delta_omega at fixed
        # delta_omega*T scales the MSE by exactly 1/4
        a = oci_bound(4, 2.0, 1.0)
        b = oci_bound(4, 4.0, 0.5)
        assert b == pytest.approx(0.25 * a, rel=1e-10)

    def test_size_guard(self):
        with pytest.raises(SizeGuardError, match="512"):
            oci_bound(513, 1.0, 1.0)
        assert oci_bound(512, 0.5, 1.0) > 0.0

    def test_invalid_inputs_rejected(self):
        with pytest.raises(ValueError, match="at least one"):
            oci_bound(0, 1.0, 1.0)
        with pytest.raises(ValueError):
            oci_bound(4, 1.0, -1.0)
        with pytest.raises(ValueError):
            oci_bound(4, math.inf, 1.0)


class TestCascadedPlan:
    def test_equal_partition(self):
        plan = cascaded_plan(64, 2.0, 4)
        assert plan.sizes == (16, 16, 16, 16)
        assert plan.times == (2.0, 1.0, 0.5, 0.25)

    def test_near_equal_partition_favors_long_times(self):
        plan = cascaded_plan(64, 1.0, 7)
        assert plan.sizes == (10, 9, 9, 9, 9, 9, 9)
        assert sum(plan.sizes) == 64

    def test_invalid_plans_rejected(self):
        with pytest.raises(ValueError, match="1 <= M <= N"):
            cascaded_plan(4, 1.0, 5)
        with pytest.raises(ValueError, match="1 <= M <= N"):
            cascaded_plan(4, 1.0, 0)
        with pytest.raises(ValueError, match="halve"):
            CascadedPlan(M=2, sizes=(2, 2), times=(1.0, 0.7))


class TestCascadedFisher:
    def test_single_ensemble_is_standard_limit(self):
        plan = cascaded_plan(64, 1.0, 1)
        assert cascaded_fisher(plan, 1.0).total == pytest.approx(256.0, rel=1e-14)

    def test_frozen_two_ensemble_value(self):
        result = cascaded_fisher(cascaded_plan(64, 1.0, 2), 1.0)
        assert result.total == pytest.approx(160.0, abs=1e-10)
        assert result.per_ensemble.sum() == pytest.approx(result.total, rel=1e-10)

    def test_additivity_across_depths(self):
        for m in (1, 2, 4, 8, 16):
            result = cascaded_fisher(cascaded_plan(64, 3.0, m), 3.0)
            assert result.per_ensemble.sum() == pytest.approx(result.total, rel=1e-10)

    def test_splitting_always_loses_information(self):
        full = 4 * 64 * 1.0
        for m in (2, 4, 8):
            assert cascaded_fisher(cascaded_plan(64, 1.0, m), 1.0).total < full

    def test_unequal_partition_rejected(self):
        plan = cascaded_plan(64, 1.0, 7)
        with pytest.raises(ValueError, match="equal partition"):
            cascaded_fisher(plan, 1.0)

    def test_time_mismatch_rejected(self):
        plan = cascaded_plan(64, 1.0, 2)
        with pytest.raises(ValueError, match="called with"):
            cascaded_fisher(plan, 2.0)


class TestCascadedBmse:
    def test_single_depth_reduces_to_plain_ramsey(self):
        # with one ensemble the scheme is an ordinary projective Ramsey
        # experiment; both pipelines should measure the same BMSE
        dw, T = 0.7, 2.0
        prior = Prior(0.0, dw)
        res_c = cascaded_bmse(64, T, prior, seed=5)
        params = ProtocolParams(
            g=0.1, tau=T, T=T, N=64, delta_omega=dw, mode=MODE_WEAK_WITH_STRONG
        )
        res_w = bmse_experiment(params, prior, "auto", n_rep=500, seed=6)
        pooled = math.hypot(res_c.stderr, res_w.stderr)
        assert res_c.chosen_M == 1
        assert abs(res_c.bmse - res_w.bmse) < 2.0 * pooled

    def test_consistent_with_fisher_floor(self):
        dw, T = 0.7, 2.0
        res = cascaded_bmse(64, T, Prior(0.0, dw), seed=5)
        fisher = cascaded_fisher(cascaded_plan(64, T, res.chosen_M), T).total
        assert res.bmse >= 1.0 / fisher - 3.0 * res.stderr

    def test_worked_depth_example(self):
        # delta_omega * T = 100 with N = 64
        prior = Prior(0.0, math.pi)
        res = cascaded_bmse(64, 100.0 / math.pi, prior, seed=12)
        assert 6 <= res.chosen_M <= 8
        assert not res.degenerate
        assert 0.0 < res.bmse < prior.variance

    def test_deterministic(self):
        prior = Prior(0.0, math.pi)
        a = cascaded_bmse(16, 4.0, prior, seed=2, n_rep=200)
        b = cascaded_bmse(16, 4.0, prior, seed=2, n_rep=200)
        assert a == b

    def test_infeasible_depth_returns_prior_variance(self):
        prior = Prior(0.0, math.pi)
        res = cascaded_bmse(2, 10000.0, prior, seed=3)
        assert res.degenerate
        assert res.chosen_M == 0
        assert res.bmse == pytest.approx(prior.variance, rel=1e-12)

    def test_invalid_inputs_rejected(self):
        with pytest.raises(ValueError, match="n_rep"):
            cascaded_bmse(4, 1.0, Prior(0.0, 1.0), seed=0, n_rep=10)
        with pytest.raises(ValueError, match="at least one"):
            cascaded_bmse(0, 1.0, Prior(0.0, 1.0), seed=0)
