"""Linear quantum stochastic systems in physical and quadrature form.

State quadratures are ordered ``x = (q_1, p_1, ..., q_n, p_n)`` with
canonical commutation relations ``x x^T - (x x^T)^T = 2i J_n``.  Field
quadratures follow the same interleaved convention, with
``w = 2 (Re A_1, Im A_1, ..., Re A_m, Im A_m)``.  Under this convention
the two-mode OPO fixture reproduces the published ``(A, B, C, D)``
matrices exactly, including the negative sign of ``B``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import RealizabilityError, UnsupportedFeedthroughError

_J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])

DEFAULT_RTOL = 1e-8


def symplectic_form(n: int) -> np.ndarray:
    """Return ``J_n = I_n (x) [[0, 1], [-1, 0]]``.

    Args:
        n (int): number of modes, at least one

    Returns:
        array: the real ``2n x 2n`` block-diagonal symplectic form
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"mode count must be positive, got {n}")
    return np.kron(np.eye(n), _J2)


def realify(Z: np.ndarray) -> np.ndarray:
    """Map a complex ``p x q`` matrix to its real ``2p x 2q`` representation.

    Each entry ``z`` becomes the block ``[[Re z, -Im z], [Im z, Re z]]``.
    The map is an algebra homomorphism that sends ``Z^H`` to the transpose,
    so unitary matrices become orthogonal symplectic ones.
    """
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    p, q = Z.shape
    out = np.empty((2 * p, 2 * q))
    out[0::2, 0::2] = Z.real
    out[0::2, 1::2] = -Z.imag
    out[1::2, 0::2] = Z.imag
    out[1::2, 1::2] = Z.real
    return out


def complexify(M: np.ndarray) -> np.ndarray:
    """Least-squares inverse of :func:`realify`.

    The part of ``M`` that does not commute with the symplectic form is
    discarded, which makes this the orthogonal projection onto the image of
    :func:`realify` followed by its inverse.
    """
    M = np.asarray(M, dtype=float)
    a, b = M[0::2, 0::2], M[0::2, 1::2]
    c, d = M[1::2, 0::2], M[1::2, 1::2]
    return 0.5 * (a + d) + 0.5j * (c - b)


def _norm2(M) -> float:
    M = np.asarray(M)
    return float(np.linalg.norm(M, 2)) if M.size else 0.0


@dataclass(frozen=True)
class PhysicalParams:
    """Hamiltonian, coupling and scattering parameters ``(R, K, S)``.

    ``output_fields`` lists the (1-based) fields whose two quadratures form
    the output ``y``, in output order.
    """

    R: np.ndarray
    K: np.ndarray
    S: np.ndarray
    output_fields: tuple = None

    def __post_init__(self):
        R = np.array(self.R, dtype=float)
        K = np.atleast_2d(np.array(self.K, dtype=complex))
        S = np.atleast_2d(np.array(self.S, dtype=complex))
        if R.ndim != 2 or R.shape[0] != R.shape[1] or R.shape[0] % 2:
            raise ValueError(f"R must be square with even size, got shape {R.shape}")
        two_n = R.shape[0]
        if K.shape[1] != two_n:
            raise ValueError(f"K must have {two_n} columns, got shape {K.shape}")
        m = K.shape[0]
        if S.shape != (m, m):
            raise ValueError(f"S must be {m}x{m}, got shape {S.shape}")
        if np.linalg.norm(R - R.T) > DEFAULT_RTOL * (1.0 + _norm2(R)):
            raise ValueError("R is not symmetric")
        if np.linalg.norm(S @ S.conj().T - np.eye(m)) > DEFAULT_RTOL * m:
            raise ValueError("S is not unitary")
        out = tuple(range(1, m + 1)) if self.output_fields is None else tuple(
            int(f) for f in self.output_fields
        )
        if len(set(out)) != len(out) or any(f < 1 or f > m for f in out):
            raise ValueError(f"output_fields must be distinct indices in 1..{m}, got {out}")
        object.__setattr__(self, "R", 0.5 * (R + R.T))
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "output_fields", out)

    @property
    def n(self) -> int:
        return self.R.shape[0] // 2

    @property
    def m(self) -> int:
        return self.K.shape[0]


@dataclass(frozen=True)
class QuadratureModel:
    """Real quadrature-form system ``dx = A x dt + B dw``, ``dy = C x dt + D dw``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        B = np.array(self.B, dtype=float)
        C = np.array(self.C, dtype=float)
        D = np.array(self.D, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] % 2 or A.shape[0] == 0:
            raise ValueError(f"A must be square with positive even size, got {A.shape}")
        two_n = A.shape[0]
        if B.ndim != 2 or B.shape[0] != two_n or B.shape[1] % 2 or B.shape[1] == 0:
            raise ValueError(f"B must be {two_n} x 2m, got {B.shape}")
        if C.ndim != 2 or C.shape[1] != two_n or C.shape[0] % 2:
            raise ValueError(f"C must be n_y x {two_n} with n_y even, got {C.shape}")
        if D.shape != (C.shape[0], B.shape[1]):
            raise ValueError(f"D must be {C.shape[0]} x {B.shape[1]}, got {D.shape}")
        if C.shape[0] > B.shape[1]:
            raise ValueError("n_y cannot exceed 2m")
        for name, M in (("A", A), ("B", B), ("C", C), ("D", D)):
            if not np.all(np.isfinite(M)):
                raise ValueError(f"{name} has non-finite entries")
            object.__setattr__(self, name, M)

    @property
    def n(self) -> int:
        return self.A.shape[0] // 2

    @property
    def m(self) -> int:
        return self.B.shape[1] // 2

    @property
    def n_y(self) -> int:
        return self.C.shape[0]

    def transform(self, T) -> "QuadratureModel":
        """Apply the state change ``x -> T x``: ``(T A T^-1, T B, C T^-1, D)``."""
        if not isinstance(T, np.ndarray):
            # Unwrap a SymplecticTransform; a bare ndarray's .T is its transpose.
            T = getattr(T, "T", T)
        T = np.asarray(T, dtype=float)
        Tinv = np.linalg.inv(T)
        return QuadratureModel(T @ self.A @ Tinv, T @ self.B, self.C @ Tinv, self.D)

    def truncate(self, r: int) -> "QuadratureModel":
        """Keep the leading ``r`` mode pairs."""
        k = 2 * r
        return QuadratureModel(self.A[:k, :k], self.B[:k], self.C[:, :k], self.D)


@dataclass(frozen=True)
class RealizabilityReport:
    residual_ccr: float
    residual_output: float
    residual_D: float
    tolerance: float
    scale: float = 1.0
    passed: bool = field(init=False)

    def __post_init__(self):
        ok = max(self.residual_ccr, self.residual_output, self.residual_D) <= self.tolerance
        object.__setattr__(self, "passed", bool(ok))

    def __bool__(self):
        return self.passed


def realizability_scale(g: QuadratureModel) -> float:
    """Magnitude of the terms entering the realizability constraints."""
    return 1.0 + max(_norm2(g.A), _norm2(g.B) ** 2, _norm2(g.C), _norm2(g.D) ** 2)


def check_realizability(g: QuadratureModel, tol: float | None = None) -> RealizabilityReport:
    """Evaluate the three physical realizability constraints of ``g``.

    Args:
        g: quadrature model
        tol: absolute tolerance on each Frobenius residual; defaults to
            ``1e-8 * realizability_scale(g)``

    Returns:
        RealizabilityReport: residuals, tolerance and pass flag
    """
    Jn = symplectic_form(g.n)
    Jm = symplectic_form(g.m)
    scale = realizability_scale(g)
    if tol is None:
        tol = DEFAULT_RTOL * scale
    r1 = np.linalg.norm(g.A @ Jn + Jn @ g.A.T + g.B @ Jm @ g.B.T)
    if g.n_y:
        r2 = np.linalg.norm(Jn @ g.C.T + g.B @ Jm @ g.D.T)
        r3 = np.linalg.norm(g.D @ Jm @ g.D.T - symplectic_form(g.n_y // 2))
    else:
        r2 = r3 = 0.0
    return RealizabilityReport(float(r1), float(r2), float(r3), float(tol), scale)


def _output_rows(fields: Sequence[int]) -> np.ndarray:
    return np.array([i for f in fields for i in (2 * (f - 1), 2 * (f - 1) + 1)], dtype=int)


def build_quadrature(p: PhysicalParams) -> QuadratureModel:
    """Quadrature-form model of the system with parameters ``(R, K, S)``.

    ``A = 2 J_n (R + Im{K^H K})``; ``B``, ``C`` and ``D`` are the real
    representations of ``2i J_n [-K^H S, K^T S^#]``, ``K`` and ``S`` in the
    interleaved field-quadrature basis, restricted to ``p.output_fields``.
    """
    Jn = symplectic_form(p.n)
    K, S = p.K, p.S
    A = 2.0 * Jn @ (p.R + (K.conj().T @ K).imag)
    G = K.conj().T @ S
    inner = np.empty((2 * p.n, 2 * p.m))
    inner[:, 0::2] = G.imag
    inner[:, 1::2] = G.real
    B = 2.0 * Jn @ inner
    C = np.empty((2 * p.m, 2 * p.n))
    C[0::2] = 2.0 * K.real
    C[1::2] = 2.0 * K.imag
    D = realify(S)
    rows = _output_rows(p.output_fields)
    return QuadratureModel(A, B, C[rows], D[rows])


def feedthrough_selection(D: np.ndarray, tol: float = 1e-8) -> np.ndarray | None:
    """Return the complex rows ``S_sel`` whose real form is ``D``, or None.

    ``D`` is supported when every 2x2 block commutes with the one-mode
    symplectic form and the rows are orthonormal, i.e. ``D`` picks whole
    quadrature pairs out of a real unitary symplectic matrix.
    """
    D = np.asarray(D, dtype=float)
    if D.shape[0] % 2 or D.shape[1] % 2:
        return None
    S_sel = complexify(D)
    if np.linalg.norm(realify(S_sel) - D) > tol * (1.0 + np.linalg.norm(D)):
        return None
    if np.linalg.norm(D @ D.T - np.eye(D.shape[0])) > tol * max(1, D.shape[0]):
        return None
    return S_sel


def complete_unitary(S_sel: np.ndarray) -> np.ndarray:
    """Extend orthonormal complex rows to a square unitary matrix.

    The added rows come from Gram-Schmidt on the standard basis vectors, in
    order, so a selection of identity rows is completed by the missing
    identity rows.
    """
    S_sel = np.atleast_2d(np.asarray(S_sel, dtype=complex))
    p, m = S_sel.shape
    rows = [r for r in S_sel]
    for e in np.eye(m, dtype=complex):
        if len(rows) == m:
            break
        v = e.copy()
        for _ in range(2):
            for r in rows:
                v -= (r.conj() @ v) * r
        nv = np.linalg.norm(v)
        if nv > 1e-8:
            rows.append(v / nv)
    return np.array(rows)


def recover_physical(g: QuadratureModel, tol: float | None = None) -> PhysicalParams:
    """Recover ``(R, K, S)`` from a physically realizable quadrature model.

    When only some output pairs are observed, the unobserved rows of ``S``
    are completed deterministically (see :func:`complete_unitary`); the
    coupling rows of those fields are then fixed up to that gauge.  The
    observed fields are labelled ``1..n_y/2``.

    Raises:
        RealizabilityError: ``g`` fails the realizability check
        UnsupportedFeedthroughError: ``D`` is not a pair selection of a
            unitary symplectic matrix
    """
    report = check_realizability(g, tol)
    if not report.passed:
        raise RealizabilityError(
            "model is not physically realizable: residuals "
            f"({report.residual_ccr:.3g}, {report.residual_output:.3g}, "
            f"{report.residual_D:.3g}) > {report.tolerance:.3g}"
        )
    S_sel = feedthrough_selection(g.D)
    if S_sel is None:
        raise UnsupportedFeedthroughError(
            "D must select whole quadrature pairs of a unitary symplectic matrix"
        )
    S = complete_unitary(S_sel) if S_sel.size else np.eye(g.m, dtype=complex)
    Jn = symplectic_form(g.n)
    inner = -0.5 * Jn @ g.B
    G = inner[:, 1::2] + 1j * inner[:, 0::2]
    K = S @ G.conj().T
    R = -0.5 * Jn @ g.A - (K.conj().T @ K).imag
    R = 0.5 * (R + R.T)
    p = PhysicalParams(R, K, S, tuple(range(1, g.n_y // 2 + 1)))
    rebuilt = build_quadrature(p)
    err = max(
        np.linalg.norm(rebuilt.A - g.A),
        np.linalg.norm(rebuilt.B - g.B),
        np.linalg.norm(rebuilt.C - g.C),
        np.linalg.norm(rebuilt.D - g.D),
    )
    if err > report.tolerance * 10:
        raise RealizabilityError(f"round trip through (R, K, S) failed with error {err:.3g}")
    return p


# Fixtures


def passive_hamiltonian(H: np.ndarray) -> np.ndarray:
    """Symmetric skew-Hamiltonian ``R`` built from a Hermitian ``n x n`` matrix."""
    H = np.atleast_2d(np.asarray(H, dtype=complex))
    return realify(0.5 * (H + H.conj().T))


def passive_coupling(M: np.ndarray) -> np.ndarray:
    """Coupling ``K = [M_1, iM_1, ..., M_n, iM_n]`` from the columns of ``M``."""
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    K = np.empty((M.shape[0], 2 * M.shape[1]), dtype=complex)
    K[:, 0::2] = M
    K[:, 1::2] = 1j * M
    return K


def dispersive_coupling(u: np.ndarray) -> np.ndarray:
    """Rows ``[u_i1, 0, u_i2, 0, ...]`` and ``[0, u_i1, 0, u_i2, ...]`` per row of ``u``."""
    u = np.atleast_2d(np.asarray(u, dtype=complex))
    k, n = u.shape
    K = np.zeros((2 * k, 2 * n), dtype=complex)
    K[0::2, 0::2] = u
    K[1::2, 1::2] = u
    return K


def opo2(eps1: float, eps2: float, gamma: float) -> PhysicalParams:
    """Two-mode optical parametric oscillator driven by two vacuum fields."""
    R = np.array(
        [
            [0.0, eps1, 0.0, -gamma],
            [eps1, 0.0, gamma, 0.0],
            [0.0, gamma, 0.0, eps2],
            [-gamma, 0.0, eps2, 0.0],
        ]
    )
    K = np.sqrt(gamma) * np.array([[1, 1j, 1, 1j], [1, 1j, 1, 1j]])
    return PhysicalParams(R, K, np.eye(2), (1,))


def dispersive(H, M, u) -> PhysicalParams:
    """Passive modes coupled passively to ``p`` fields and dispersively to ``2k`` more.

    Args:
        H (array[complex]): ``n x n`` Hermitian matrix defining the passive ``R``
        M (array[complex]): ``p x n``; row ``l`` holds the passive coupling of field ``l``
        u (array[complex]): ``k x n`` dispersive coupling strengths; row ``i``
            couples every position quadrature to one field and every momentum
            quadrature to the next

    Returns:
        PhysicalParams: with ``S = I`` and the outputs taken from the first ``p`` fields
    """
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    u = np.atleast_2d(np.asarray(u, dtype=complex))
    K = np.vstack([passive_coupling(M), dispersive_coupling(u)])
    m = K.shape[0]
    return PhysicalParams(passive_hamiltonian(H), K, np.eye(m), tuple(range(1, M.shape[0] + 1)))


def random_dispersive(rng: np.random.Generator, n: int, p: int, k: int) -> PhysicalParams:
    """Random dispersive system whose rows ``u`` satisfy ``Im(u^H u) = 0``.

    Each dispersive row is a real vector times a common phase; this is the
    condition under which the observability Gramian equals the identity.
    """
    H = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    M = rng.normal(size=(p, n)) + 1j * rng.normal(size=(p, n))
    u = rng.normal(size=(k, n)) * np.exp(1j * rng.uniform(0, 2 * np.pi, size=(k, 1)))
    return dispersive(H, M, u)


def fixture(name: str, params: Sequence[float]) -> PhysicalParams:
    """Named example systems from a flat parameter list.

    ``opo2`` takes ``(eps1, eps2, gamma)``.  ``dispersive`` takes
    ``(n, p, k)`` followed by the real then imaginary parts (row-major) of
    ``H`` (``n x n``), ``M`` (``p x n``) and ``u`` (``k x n``).
    """
    params = [float(v) for v in params]
    if name == "opo2":
        if len(params) != 3:
            raise ValueError("opo2 expects (eps1, eps2, gamma)")
        return opo2(*params)
    if name == "dispersive":
        if len(params) < 3:
            raise ValueError("dispersive expects (n, p, k, ...)")
        n, p, k = (int(v) for v in params[:3])
        sizes = [(n, n), (p, n), (k, n)]
        need = 3 + 2 * sum(a * b for a, b in sizes)
        if len(params) != need:
            raise ValueError(f"dispersive with n={n}, p={p}, k={k} expects {need} values")
        vals = np.array(params[3:])
        mats, pos = [], 0
        for a, b in sizes:
            size = a * b
            re = vals[pos : pos + size].reshape(a, b)
            im = vals[pos + size : pos + 2 * size].reshape(a, b)
            mats.append(re + 1j * im)
            pos += 2 * size
        return dispersive(*mats)
    raise ValueError(f"unknown fixture {name!r}; expected 'opo2' or 'dispersive'")


def dispersive_params(H, M, u) -> list:
    """Inverse of the ``dispersive`` branch of :func:`fixture`."""
    mats = [np.atleast_2d(np.asarray(X, dtype=complex)) for X in (H, M, u)]
    n, p, k = mats[0].shape[0], mats[1].shape[0], mats[2].shape[0]
    out = [float(n), float(p), float(k)]
    for X in mats:
        out += list(X.real.ravel()) + list(X.imag.ravel())
    return out
