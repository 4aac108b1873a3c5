import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lqss.exceptions import NotQuasiBalanceableError
from lqss.gramians import gramians, hinf_norm
from lqss.model import PhysicalParams, build_quadrature, fixture, opo2, random_dispersive
from lqss.quasibalance import (
    block_form_check,
    block_form_violations,
    commutator_condition,
    commutator_norm,
    error_system,
    group_pairs,
    is_quasi_balanceable,
    quasi_balance,
    quasi_balanceability,
    truncate,
)
from lqss.symplectic import symplectic_eigenvalues

from _systems import (
    EPS1,
    EPS2,
    GAMMA,
    grid_hinf,
    random_stable_generic_model,
    random_transformed_passive,
)


def _opo2_model():
    return build_quadrature(opo2(EPS1, EPS2, GAMMA))


class TestCommutator:
    def test_identity(self):
        assert commutator_norm(np.eye(4), np.eye(4)) == 0.0

    def test_paired_diagonals_commute(self):
        P = np.diag([2.0, 2.0, 1.0, 1.0])
        Q = np.diag([1.0, 1.0, 3.0, 3.0])
        assert commutator_condition(P, Q)

    def test_unpaired_diagonal_fails(self):
        P = np.diag([2.0, 0.5])
        assert not commutator_condition(P, np.eye(2))

    def test_zero_gramian(self):
        assert commutator_norm(np.zeros((2, 2)), np.eye(2)) == 0.0


class TestBlockForm:
    def test_group_pairs(self):
        assert group_pairs([3.0, 3.0 * (1 + 1e-9), 1.0, 0.5, 0.5]) == [[0, 1], [2], [3, 4]]
        assert group_pairs([]) == []

    def test_distinct_sigma_requires_zero_off_diagonal(self):
        Qt = np.eye(4)
        Qt[0, 2] = Qt[2, 0] = 0.1
        Qt[1, 3] = Qt[3, 1] = 0.1
        assert not block_form_check(Qt, [2.0, 1.0])
        assert block_form_check(Qt, [1.0, 1.0])
        assert {(j, k) for j, k, _ in block_form_violations(Qt, [2.0, 1.0])} == {(0, 1), (1, 0)}

    def test_diagonal_block_must_be_scalar(self):
        assert not block_form_check(np.diag([1.0, 2.0, 1.0, 1.0]), [1.0, 1.0])

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            block_form_check(np.eye(4), [1.0])


class TestOpo2:
    def test_balanceable_and_criteria_agree(self):
        ok, diag = is_quasi_balanceable(_opo2_model())
        assert ok and diag.agree and diag.start == "P"

    def test_balanced_gramians(self):
        qbr = quasi_balance(_opo2_model())
        np.testing.assert_allclose(qbr.sigma_P.values, [1.0, 1.0], atol=1e-10)
        np.testing.assert_allclose(qbr.sigma_Q.values, [0.5, 0.5], atol=1e-10)
        np.testing.assert_allclose(qbr.hankel_values, [np.sqrt(0.5)] * 2, atol=1e-10)
        assert qbr.residual_P <= 1e-10 and qbr.residual_Q <= 1e-10
        assert qbr.realizability.passed

    def test_truncation(self):
        qbr = quasi_balance(_opo2_model())
        r1 = truncate(qbr, 1)
        assert r1.realizability.passed
        assert r1.error_hinf == pytest.approx(grid_hinf(error_system(qbr.model, r1.model)), rel=1e-4)
        r2 = truncate(qbr, 2)
        assert r2.error_hinf <= 1e-9


class TestDispersive:
    @pytest.mark.parametrize("seed", range(20))
    def test_random_instances_are_balanceable(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 4))
        g = build_quadrature(random_dispersive(rng, n, int(rng.integers(1, 3)), int(rng.integers(1, 3))))
        G = gramians(g)
        np.testing.assert_allclose(G.Q, np.eye(2 * n), atol=1e-8)
        ok, diag = is_quasi_balanceable(g)
        assert ok and diag.agree
        qbr = quasi_balance(g)
        assert qbr.realizability.passed
        # With Q = I the Hankel values are the square roots of the symplectic eigenvalues of P.
        np.testing.assert_allclose(qbr.hankel_values, np.sqrt(symplectic_eigenvalues(G.P).values), rtol=1e-7)

    def test_fixture_default(self):
        p = fixture("dispersive", [1, 1, 1, 1.0, 0.0, 1.0, 0.0, 0.5, 0.0])
        assert is_quasi_balanceable(build_quadrature(p))[0]


class TestTransformedPassive:
    @settings(max_examples=100, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_balanceable_with_invariant_hankel_values(self, seed):
        g2, T, g = random_transformed_passive(np.random.default_rng(seed))
        ok, diag = is_quasi_balanceable(g2)
        assert ok and diag.agree
        qbr = quasi_balance(g2)
        # Passive P = I, so the invariants of g are sqrt of the symplectic eigenvalues of Q.
        expected = np.sqrt(symplectic_eigenvalues(gramians(g).Q).values)
        np.testing.assert_allclose(qbr.hankel_values, expected, rtol=1e-6, atol=1e-8)
        assert qbr.residual_P <= 1e-7 and qbr.residual_Q <= 1e-7
        assert qbr.realizability.passed

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_gramian_transformation_law(self, seed):
        g2, T, g = random_transformed_passive(np.random.default_rng(seed))
        G, G2 = gramians(g), gramians(g2)
        Tinv = np.linalg.inv(T)
        np.testing.assert_allclose(G2.P, T @ G.P @ T.T, atol=1e-8 * np.linalg.norm(G2.P))
        np.testing.assert_allclose(G2.Q, Tinv.T @ G.Q @ Tinv, atol=1e-8 * np.linalg.norm(G2.Q))

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_dual_start_agrees(self, seed):
        g2, _, _ = random_transformed_passive(np.random.default_rng(seed))
        if np.linalg.eigvalsh(gramians(g2).Q).min() <= 1e-8:
            return
        a = quasi_balance(g2, start="P")
        b = quasi_balance(g2, start="Q")
        np.testing.assert_allclose(b.hankel_values, a.hankel_values, rtol=1e-6, atol=1e-8)
        assert b.residual_P <= 1e-7 and b.residual_Q <= 1e-7

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_truncation_is_realizable_and_monotone(self, seed):
        g2, _, _ = random_transformed_passive(np.random.default_rng(seed), n_max=4)
        qbr = quasi_balance(g2)
        errs = []
        for r in range(1, qbr.n + 1):
            red = truncate(qbr, r)
            assert red.realizability.passed
            assert red.error_hinf is not None
            errs.append(red.error_hinf)
        assert errs[-1] <= 1e-6 * (1 + errs[0])
        # Monotonic decrease is observed, not guaranteed; allow bisection slack.
        assert all(b <= a * (1 + 1e-5) + 1e-9 for a, b in zip(errs, errs[1:]))


class TestGeneric:
    @pytest.mark.parametrize("seed", range(100))
    def test_criteria_agree(self, seed):
        g = random_stable_generic_model(np.random.default_rng(1000 + seed))
        G = gramians(g)
        ok, diag = quasi_balanceability(G.P, G.Q)
        assert diag.agree
        if not ok:
            with pytest.raises(NotQuasiBalanceableError, match="block form"):
                quasi_balance(g)


def test_unobservable_mode_gives_zero_hankel_value():
    # Two uncoupled cavities; only the first one's output field is measured.
    k1, k2 = 2.0, 3.0
    K = np.array([[np.sqrt(k1), 1j * np.sqrt(k1), 0, 0], [0, 0, np.sqrt(k2), 1j * np.sqrt(k2)]])
    g = build_quadrature(PhysicalParams(np.zeros((4, 4)), K, np.eye(2), (1,)))
    G = gramians(g)
    assert np.linalg.eigvalsh(G.Q).min() == pytest.approx(0.0, abs=1e-12)
    qbr = quasi_balance(g)
    np.testing.assert_allclose(qbr.hankel_values, [1.0, 0.0], atol=1e-10)
    red = truncate(qbr, 1)
    assert red.error_hinf <= 1e-8
    assert red.realizability.passed
    with pytest.raises(ValueError):
        quasi_balance(g, start="Q")


def test_truncate_rejects_bad_r():
    qbr = quasi_balance(_opo2_model())
    with pytest.raises(ValueError):
        truncate(qbr, 0)
    with pytest.raises(ValueError):
        truncate(qbr, 3)


def test_error_system_norm_matches_difference():
    qbr = quasi_balance(_opo2_model())
    red = truncate(qbr, 1)
    assert hinf_norm(error_system(qbr.model, red.model)) == pytest.approx(red.error_hinf, rel=1e-5)
