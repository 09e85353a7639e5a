"""Entanglement measures for three-qubit pure states.

Pairwise concurrence (Wootters), one-vs-rest concurrence, the residual
three-way tangle, and the sum of the three pairwise concurrences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qcore import DensityMatrix, StateVector, reduced_density

_SY_SY = np.kron(
    np.array([[0.0, -1.0j], [1.0j, 0.0]]),
    np.array([[0.0, -1.0j], [1.0j, 0.0]]),
)

#: Negative round-off allowed before a tangle value is considered invalid.
TANGLE_TOL = 1e-9


@dataclass(frozen=True)
class TangleReport:
    """Decomposition of the three-way tangle around a pivot qubit.

    tau = c_one_rest^2 - c_pq^2 - c_pr^2 (clamped to [0, 1] after a
    -1e-9 sanity bound); pq/pr are the pivot's pairings with the other two
    qubits in ascending index order.
    """

    c_one_rest: float
    c_pq: float
    c_pr: float
    tau: float
    pivot_qubit: int


def concurrence_pure2(state: StateVector) -> float:
    """|<psi| sigma_y x sigma_y |psi*>| for a two-qubit pure state."""
    if state.num_qubits != 2:
        raise ValueError(f"expected a 2-qubit state, got {state.num_qubits} qubits")
    psi = state.amps
    return float(abs(psi.conj() @ (_SY_SY @ psi.conj())))


def concurrence_mixed2(rho: DensityMatrix) -> float:
    """Wootters concurrence max(0, l1-l2-l3-l4) of a two-qubit density matrix.

    The l_i are the decreasing square roots of the eigenvalues of
    rho (sy x sy) rho* (sy x sy), computed from the Hermitian-equivalent
    form sqrt(rho) rho~ sqrt(rho) for numerical stability.
    """
    if rho.num_qubits != 2:
        raise ValueError(f"expected a 2-qubit density matrix, got {rho.num_qubits} qubits")
    mat = rho.matrix
    rho_tilde = _SY_SY @ mat.conj() @ _SY_SY
    evals, vecs = np.linalg.eigh(mat)
    sqrt_rho = (vecs * np.sqrt(np.clip(evals, 0.0, None))) @ vecs.conj().T
    omega = sqrt_rho @ rho_tilde @ sqrt_rho
    omega = (omega + omega.conj().T) / 2.0
    lam = np.clip(np.linalg.eigvalsh(omega), 0.0, None)
    # Eigenvalues at the round-off floor are exact zeros of rank-deficient
    # products; square-rooting the noise would cost ~1e-8 accuracy.
    lam[lam < lam.max() * 1e-12] = 0.0
    mu = np.sqrt(lam)[::-1]
    return max(0.0, float(mu[0] - mu[1] - mu[2] - mu[3]))


def one_rest_concurrence(state: StateVector, pivot: int) -> float:
    """Concurrence of one qubit against the other two, 2 sqrt(det rho_pivot)."""
    if state.num_qubits != 3:
        raise ValueError(f"expected a 3-qubit state, got {state.num_qubits} qubits")
    rho = reduced_density(state, [pivot]).matrix
    det = float(np.linalg.det(rho).real)
    return 2.0 * math.sqrt(max(0.0, det))


def three_tangle(state: StateVector, pivot: int = 0) -> TangleReport:
    """Residual tangle tau = C_{P(QR)}^2 - C_{PQ}^2 - C_{PR}^2.

    tau is pivot-independent for pure states up to round-off; values in
    [-1e-9, 0) are clamped to 0, anything lower is an error.
    """
    if state.num_qubits != 3:
        raise ValueError(f"expected a 3-qubit state, got {state.num_qubits} qubits")
    others = [q for q in range(3) if q != pivot]
    c_one = one_rest_concurrence(state, pivot)
    c_pq = concurrence_mixed2(reduced_density(state, [pivot, others[0]]))
    c_pr = concurrence_mixed2(reduced_density(state, [pivot, others[1]]))
    tau = c_one**2 - c_pq**2 - c_pr**2
    if tau < -TANGLE_TOL:
        raise ValueError(f"tangle {tau} below the -{TANGLE_TOL} sanity bound")
    return TangleReport(c_one, c_pq, c_pr, min(1.0, max(0.0, tau)), pivot)


def concurrence_sum(state: StateVector) -> float:
    """C_AB + C_BC + C_CA over the three two-qubit reductions."""
    if state.num_qubits != 3:
        raise ValueError(f"expected a 3-qubit state, got {state.num_qubits} qubits")
    return sum(
        concurrence_mixed2(reduced_density(state, pair))
        for pair in ([0, 1], [1, 2], [0, 2])
    )
