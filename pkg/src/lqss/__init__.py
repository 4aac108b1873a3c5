"""Quasi-balanced truncation toolkit for linear quantum stochastic systems."""

from .gramians import GramianPair, gramians, hinf_norm, is_hurwitz, solve_lyapunov
from .model import (
    PhysicalParams,
    QuadratureModel,
    RealizabilityReport,
    build_quadrature,
    check_realizability,
    fixture,
    recover_physical,
    symplectic_form,
)
from .passivity import (
    PassivityReport,
    PurityReport,
    is_completely_passive,
    is_pure_steady_state,
    log_negativity,
    passify,
    passivity_from_gramian,
)
from .quasibalance import (
    QuasiBalancedRealization,
    ReducedModel,
    block_form_check,
    commutator_condition,
    is_quasi_balanceable,
    quasi_balance,
    truncate,
)
from .symplectic import (
    SymplecticSpectrum,
    SymplecticTransform,
    is_skew_hamiltonian,
    is_symplectic,
    symplectic_eigenvalues,
    unitary_symplectic_diagonalize,
    williamson,
)

__version__ = "0.1.0"
