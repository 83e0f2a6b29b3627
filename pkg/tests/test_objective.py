import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fairboost import (
    ContractError,
    FAIR_LOGISTIC,
    GradHess,
    ObjectiveConfig,
    ParameterError,
    VANILLA_LOGISTIC,
    grad_hess,
    regularized_loss,
    sigmoid,
)

from oracles import fd_centered, instance_losses


def batch(raw, y, s):
    return (
        np.asarray(raw, dtype=np.float64),
        np.asarray(y, dtype=np.float64),
        np.asarray(s, dtype=np.float64),
    )


class TestSigmoid:
    def test_zero_maps_to_half(self):
        assert sigmoid(0.0) == 0.5

    def test_known_value(self):
        assert sigmoid(math.log(3.0)) == pytest.approx(0.75, abs=1e-15)

    def test_saturation_stays_inside_open_interval(self):
        with np.errstate(over="raise", under="ignore"):
            hi = float(sigmoid(40.0))
            lo = float(sigmoid(-40.0))
            far_hi = float(sigmoid(700.0))
            far_lo = float(sigmoid(-700.0))
        assert 1.0 - 1e-15 < hi < 1.0
        assert 0.0 < lo < 1e-15
        assert 0.0 < far_lo < far_hi < 1.0

    def test_monotone(self):
        z = np.linspace(-60.0, 60.0, 2001)
        p = sigmoid(z)
        assert np.all(np.diff(p) >= 0.0)

    def test_symmetry(self):
        z = np.linspace(-20.0, 20.0, 401)
        assert np.max(np.abs(sigmoid(-z) - (1.0 - sigmoid(z)))) <= 1e-15


class TestObjectiveConfig:
    @pytest.mark.parametrize("mu", [-0.1, 1.0001, float("nan"), float("inf")])
    def test_mu_out_of_range(self, mu):
        with pytest.raises(ParameterError):
            ObjectiveConfig(mu=mu)

    def test_unknown_kind(self):
        with pytest.raises(ParameterError):
            ObjectiveConfig(mu=0.0, kind="hinge")

    def test_vanilla_rejects_nonzero_mu(self):
        with pytest.raises(ParameterError):
            ObjectiveConfig(mu=0.3, kind=VANILLA_LOGISTIC)

    def test_boundaries_accepted(self):
        assert ObjectiveConfig(mu=0.0).mu == 0.0
        assert ObjectiveConfig(mu=1.0).mu == 1.0


class TestGradHessWorkedValues:
    def test_plain_logistic_at_zero_score(self):
        gh = grad_hess(*batch([0.0], [1.0], [0.0]), ObjectiveConfig(mu=0.0))
        assert gh.grad[0] == -0.5
        assert gh.hess[0] == 0.25

    def test_half_strength(self):
        gh = grad_hess(*batch([0.0], [1.0], [0.0]), ObjectiveConfig(mu=0.5))
        assert gh.grad[0] == -0.75
        assert gh.hess[0] == 0.125

    def test_full_strength_zeroes_hessian_exactly(self):
        gh = grad_hess(*batch([2.0], [0.0], [1.0]), ObjectiveConfig(mu=1.0))
        assert gh.grad[0] == 1.0
        assert gh.hess[0] == 0.0

    def test_validation(self):
        cfg = ObjectiveConfig(mu=0.0)
        with pytest.raises(ContractError):
            grad_hess(np.array([0.0, 1.0]), np.array([1.0]), np.array([0.0]), cfg)
        with pytest.raises(ContractError):
            grad_hess(np.array([np.inf]), np.array([1.0]), np.array([0.0]), cfg)
        with pytest.raises(ContractError):
            grad_hess(np.array([0.0]), np.array([0.5]), np.array([0.0]), cfg)
        with pytest.raises(ContractError):
            grad_hess(np.array([0.0]), np.array([1.0]), np.array([2.0]), cfg)


class TestLossWorkedValues:
    def test_single_instance_log_two(self):
        loss = regularized_loss(*batch([0.0], [1.0], [0.0]), ObjectiveConfig(mu=0.0))
        assert loss == pytest.approx(math.log(2.0), abs=1e-12)

    def test_group_term_cancels_data_term(self):
        loss = regularized_loss(*batch([0.0], [1.0], [1.0]), ObjectiveConfig(mu=1.0))
        assert abs(loss) <= 1e-15

    def test_saturated_scores_stay_finite(self):
        raw, y, s = batch([1000.0, -1000.0], [0.0, 1.0], [1.0, 0.0])
        loss = regularized_loss(raw, y, s, ObjectiveConfig(mu=0.7))
        assert math.isfinite(loss)

    def test_matches_per_instance_oracle(self):
        rng = np.random.default_rng(7)
        raw = rng.uniform(-8.0, 8.0, size=200)
        y = rng.integers(0, 2, size=200).astype(np.float64)
        s = rng.integers(0, 2, size=200).astype(np.float64)
        for mu in (0.0, 0.3, 1.0):
            expected = float(np.sum(instance_losses(raw, y, s, mu)))
            got = regularized_loss(raw, y, s, ObjectiveConfig(mu=mu))
            assert got == pytest.approx(expected, rel=1e-12)


finite_arrays = st.integers(1, 40).flatmap(
    lambda n: st.tuples(
        st.lists(st.floats(-30.0, 30.0), min_size=n, max_size=n),
        st.lists(st.integers(0, 1), min_size=n, max_size=n),
        st.lists(st.integers(0, 1), min_size=n, max_size=n),
        st.floats(0.0, 1.0),
    )
)


class TestAlgebraicIdentities:
    @given(finite_arrays)
    def test_grad_and_hess_relations_are_bit_exact(self, case):
        raw, y, s, mu = case
        raw, y, s = batch(raw, y, s)
        vanilla = grad_hess(raw, y, s, ObjectiveConfig(mu=0.0, kind=VANILLA_LOGISTIC))
        fair = grad_hess(raw, y, s, ObjectiveConfig(mu=mu, kind=FAIR_LOGISTIC))
        p = sigmoid(raw)
        assert np.array_equal(fair.grad, vanilla.grad + mu * (s - p))
        assert np.array_equal(fair.hess, (1.0 - mu) * vanilla.hess)

    @given(finite_arrays)
    def test_hessian_range(self, case):
        raw, y, s, mu = case
        raw, y, s = batch(raw, y, s)
        gh = grad_hess(raw, y, s, ObjectiveConfig(mu=mu))
        assert np.all(gh.hess >= 0.0)
        assert np.all(gh.hess <= 0.25)

    @given(finite_arrays)
    def test_mu_zero_equals_vanilla_bitwise(self, case):
        raw, y, s, _mu = case
        raw, y, s = batch(raw, y, s)
        fair = grad_hess(raw, y, s, ObjectiveConfig(mu=0.0, kind=FAIR_LOGISTIC))
        vanilla = grad_hess(raw, y, s, ObjectiveConfig(mu=0.0, kind=VANILLA_LOGISTIC))
        assert np.array_equal(fair.grad, vanilla.grad)
        assert np.array_equal(fair.hess, vanilla.hess)

    @given(finite_arrays)
    def test_chunked_evaluation_matches(self, case):
        raw, y, s, mu = case
        raw, y, s = batch(raw, y, s)
        cfg = ObjectiveConfig(mu=mu)
        whole = grad_hess(raw, y, s, cfg)
        k = len(raw) // 2 or 1
        first = grad_hess(raw[:k], y[:k], s[:k], cfg)
        second = grad_hess(raw[k:], y[k:], s[k:], cfg) if k < len(raw) else GradHess(
            grad=np.array([]), hess=np.array([])
        )
        assert np.array_equal(whole.grad, np.concatenate([first.grad, second.grad]))
        assert np.array_equal(whole.hess, np.concatenate([first.hess, second.hess]))


class TestFiniteDifferences:
    def test_grad_matches_fd_of_loss(self):
        rng = np.random.default_rng(11)
        raw = rng.uniform(-8.0, 8.0, size=300)
        y = rng.integers(0, 2, size=300).astype(np.float64)
        s = rng.integers(0, 2, size=300).astype(np.float64)
        for mu in (0.0, 0.25, 0.8, 1.0):
            gh = grad_hess(raw, y, s, ObjectiveConfig(mu=mu))
            fd = fd_centered(lambda z: instance_losses(z, y, s, mu), raw, 1e-5)
            assert np.all(np.abs(gh.grad - fd) <= 1e-6 * (1.0 + np.abs(gh.grad)))

    def test_hess_matches_fd_of_grad(self):
        rng = np.random.default_rng(12)
        raw = rng.uniform(-8.0, 8.0, size=300)
        y = rng.integers(0, 2, size=300).astype(np.float64)
        s = rng.integers(0, 2, size=300).astype(np.float64)
        for mu in (0.0, 0.25, 0.8, 1.0):
            cfg = ObjectiveConfig(mu=mu)
            gh = grad_hess(raw, y, s, cfg)
            fd = fd_centered(lambda z: grad_hess(z, y, s, cfg).grad, raw, 1e-5)
            assert np.all(np.abs(gh.hess - fd) <= 1e-5 * (1.0 + np.abs(gh.hess)))
