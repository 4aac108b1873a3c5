import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lqss.gramians import gramians
from lqss.model import build_quadrature, opo2, passive_hamiltonian, realify, symplectic_form
from lqss.symplectic import (
    SymplecticSpectrum,
    SymplecticTransform,
    has_passive_block_form,
    is_skew_hamiltonian,
    is_symplectic,
    pair_permutation,
    random_symplectic,
    symplectic_eigenvalues,
    unitary_symplectic_diagonalize,
    williamson,
)

from _systems import EPS1, EPS2, GAMMA, TP_EXACT, TP_PRINTED, random_unitary


def _random_pd(rng, n, cond=1e3):
    Q, _ = np.linalg.qr(rng.normal(size=(2 * n, 2 * n)))
    w = np.geomspace(1.0, cond, 2 * n)
    rng.shuffle(w)
    return (Q * w) @ Q.T


class TestIsSymplectic:
    @pytest.mark.parametrize(
        "T, expected",
        [
            (np.eye(2), True),
            (np.diag([2.0, 0.5]), True),
            (np.diag([2.0, 2.0]), False),
            (np.array([[0.0, 1.0], [-1.0, 0.0]]), True),
            (np.array([[1.0, 3.0], [0.0, 1.0]]), True),
            (np.diag([1.0, 1.0, 1.0, -1.0]), False),
        ],
    )
    def test_examples(self, T, expected):
        assert is_symplectic(T) is expected

    def test_odd_dimension_rejected(self):
        with pytest.raises(ValueError):
            is_symplectic(np.eye(3))

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 6))
    def test_random_symplectic_group(self, seed, n):
        rng = np.random.default_rng(seed)
        T1, T2 = random_symplectic(rng, n), random_symplectic(rng, n)
        S = SymplecticTransform(T1) @ SymplecticTransform(T2)
        assert is_symplectic(S.T, 1e-9 * np.linalg.norm(S.T) ** 2)
        np.testing.assert_allclose(SymplecticTransform(T1).inverse() @ T1, np.eye(2 * n), atol=1e-10)

    def test_transform_rejects_non_symplectic(self):
        with pytest.raises(ValueError, match="not symplectic"):
            SymplecticTransform(2 * np.eye(2))

    def test_realified_unitary_is_orthosymplectic(self):
        U = realify(random_unitary(np.random.default_rng(1), 3))
        assert is_symplectic(U)
        np.testing.assert_allclose(U @ U.T, np.eye(6), atol=1e-12)

    def test_pair_permutation(self):
        Pi = pair_permutation([1, 0])
        assert is_symplectic(Pi)
        np.testing.assert_array_equal(Pi @ np.arange(4.0), [2, 3, 0, 1])


class TestSymplecticEigenvalues:
    def test_diagonal(self):
        s = symplectic_eigenvalues(np.diag([4.0, 1.0]))
        np.testing.assert_allclose(s.values, [2.0])

    def test_paired_form(self):
        s = symplectic_eigenvalues(np.diag([3.0, 3.0, 0.5, 0.5]))
        np.testing.assert_allclose(s.values, [3.0, 0.5])
        np.testing.assert_allclose(s.paired(), np.diag([3.0, 3.0, 0.5, 0.5]))

    def test_opo2_controllability_gramian_is_pure(self):
        P = gramians(build_quadrature(opo2(EPS1, EPS2, GAMMA))).P
        np.testing.assert_allclose(symplectic_eigenvalues(P).values, [1.0, 1.0], atol=1e-8)

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            symplectic_eigenvalues(np.array([[1.0, 1.0], [0.0, 1.0]]))

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 5))
    def test_congruence_invariance(self, seed, n):
        rng = np.random.default_rng(seed)
        X = _random_pd(rng, n)
        T = random_symplectic(rng, n, squeeze=0.7)
        s1 = symplectic_eigenvalues(X).values
        s2 = symplectic_eigenvalues(T @ X @ T.T).values
        np.testing.assert_allclose(s2, s1, rtol=1e-7)

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 5))
    def test_matches_eigenvalues_of_iJX(self, seed, n):
        X = _random_pd(np.random.default_rng(seed), n)
        w = np.linalg.eigvals(1j * symplectic_form(n) @ X).real
        expected = np.sort(w)[::-1][:n]
        np.testing.assert_allclose(symplectic_eigenvalues(X).values, expected, rtol=1e-8)


class TestWilliamson:
    def test_diag_4_1(self):
        T, s = williamson(np.diag([4.0, 1.0]))
        np.testing.assert_allclose(s.values, [2.0])
        np.testing.assert_allclose(T.T @ np.diag([4.0, 1.0]) @ T.T.T, 2 * np.eye(2), atol=1e-12)
        np.testing.assert_allclose(np.abs(T.T), np.diag([1 / np.sqrt(2), np.sqrt(2)]), atol=1e-12)

    def test_opo2_reproduces_printed_transform(self):
        P = gramians(build_quadrature(opo2(EPS1, EPS2, GAMMA))).P
        T, s = williamson(P)
        np.testing.assert_allclose(s.values, [1.0, 1.0], atol=1e-12)
        np.testing.assert_allclose(T.T @ P @ T.T.T, np.eye(4), atol=1e-10)
        # The printed T_P must itself be a valid Williamson factor of P.
        np.testing.assert_allclose(TP_EXACT @ P @ TP_EXACT.T, np.eye(4), atol=1e-10)
        np.testing.assert_allclose(TP_PRINTED @ P @ TP_PRINTED.T, np.eye(4), atol=2e-4)
        assert is_symplectic(TP_EXACT, 1e-12)

    def test_rejects_indefinite(self):
        with pytest.raises(ValueError, match="positive definite"):
            williamson(np.diag([1.0, -1.0]))

    @settings(max_examples=100, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 6))
    def test_random_positive_definite(self, seed, n):
        X = _random_pd(np.random.default_rng(seed), n)
        T, s = williamson(X)
        assert np.all(np.diff(s.values) <= 1e-12 * s.values[0])
        D = T.T @ X @ T.T.T
        np.testing.assert_allclose(D, s.paired(), atol=1e-8 * np.linalg.norm(X))
        assert T.residual <= 1e-8 * max(1.0, np.linalg.norm(T.T, 2) ** 2)


class TestSkewHamiltonian:
    def test_realified_hermitian(self):
        H = np.array([[1.0, 2 - 1j], [2 + 1j, -3.0]])
        M = passive_hamiltonian(H)
        assert is_skew_hamiltonian(M)
        assert has_passive_block_form(M)

    @pytest.mark.parametrize(
        "M, expected",
        [
            (np.eye(2), True),
            (np.diag([1.0, 2.0]), False),
            (np.array([[0.0, 1.0], [1.0, 0.0]]), False),
            (np.zeros((4, 4)), True),
            (realify(np.array([[0.0, 1j], [-1j, 0.0]])), True),
        ],
    )
    def test_examples(self, M, expected):
        assert is_skew_hamiltonian(M) is expected
        assert has_passive_block_form(M) is expected

    @settings(max_examples=100, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 5))
    def test_random_symmetric_is_not(self, seed, n):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(2 * n, 2 * n))
        assert not is_skew_hamiltonian(X + X.T)


class TestUnitarySymplecticDiagonalize:
    @settings(max_examples=80, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 5))
    def test_hermitian(self, seed, n):
        rng = np.random.default_rng(seed)
        Z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        Qs = passive_hamiltonian(Z)
        T, s = unitary_symplectic_diagonalize(Qs)
        np.testing.assert_allclose(T.T @ T.T.T, np.eye(2 * n), atol=1e-10)
        Tinv = T.inverse()
        np.testing.assert_allclose(Tinv.T @ Qs @ Tinv, s.paired(), atol=1e-9 * (1 + np.linalg.norm(Qs)))
        np.testing.assert_allclose(s.values, np.linalg.eigvalsh(0.5 * (Z + Z.conj().T))[::-1], atol=1e-10)

    def test_singular_allowed(self):
        Qs = passive_hamiltonian(np.array([[1.0, 1.0], [1.0, 1.0]]))
        _, s = unitary_symplectic_diagonalize(Qs)
        np.testing.assert_allclose(s.values, [2.0, 0.0], atol=1e-12)

    def test_rejects_generic_symmetric(self):
        with pytest.raises(ValueError, match="skew-Hamiltonian"):
            unitary_symplectic_diagonalize(np.diag([1.0, 2.0]))


def test_spectrum_container():
    s = SymplecticSpectrum([3, 1])
    assert len(s) == 2 and list(s) == [3.0, 1.0] and s[0] == 3.0
