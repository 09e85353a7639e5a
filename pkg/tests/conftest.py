"""Shared fixtures and independent oracles.

The oracle helpers here deliberately avoid the library's tensordot-based
code paths: joint probabilities come from explicit Kronecker products,
partial traces from an index-summation loop, and Wootters eigenvalues from
the non-Hermitian product matrix. Tests compare the package against these.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from qtriad.qcore import MeasurementBasis, StateVector

SQ2 = 1.0 / math.sqrt(2.0)

BASIS_KETS = {
    "X": (np.array([SQ2, SQ2]), np.array([SQ2, -SQ2])),
    "Y": (np.array([SQ2, 1j * SQ2]), np.array([SQ2, -1j * SQ2])),
    "Z": (np.array([1.0, 0.0]), np.array([0.0, 1.0])),
}


def lambda_kets(angle: float) -> tuple[np.ndarray, np.ndarray]:
    return (
        np.array([math.sin(angle), -math.cos(angle)]),
        np.array([math.cos(angle), math.sin(angle)]),
    )


def basis_kets(basis: MeasurementBasis) -> tuple[np.ndarray, np.ndarray]:
    if basis.kind == "Lambda":
        return lambda_kets(basis.lambda_angle)
    return BASIS_KETS[basis.kind]


def oracle_joint_probability(state: StateVector, bases, branch_bits) -> float:
    """P(outcome) via an explicit Kronecker-product projector."""
    ket = np.array([1.0])
    for basis, bit in zip(bases, branch_bits):
        ket = np.kron(ket, basis_kets(basis)[bit])
    amp = ket.conj() @ state.amps
    return float(abs(amp) ** 2)


def oracle_product_expectation(state: StateVector, names: str) -> float:
    """<psi| O1 x O2 x O3 |psi> with explicit Pauli matrices."""
    mats = {
        "X": np.array([[0, 1], [1, 0]], dtype=complex),
        "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
        "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    }
    op = np.array([[1.0]], dtype=complex)
    for name in names:
        op = np.kron(op, mats[name])
    return float((state.amps.conj() @ op @ state.amps).real)


def oracle_partial_trace(state: StateVector, keep: list[int]) -> np.ndarray:
    """Index-summation partial trace, independent of tensordot."""
    n = state.num_qubits
    keep = sorted(keep)
    drop = [q for q in range(n) if q not in keep]
    dim_k = 2 ** len(keep)
    rho = np.zeros((dim_k, dim_k), dtype=complex)
    full = np.outer(state.amps, state.amps.conj())

    def build(bits_keep, bits_drop):
        bits = [0] * n
        for q, b in zip(keep, bits_keep):
            bits[q] = b
        for q, b in zip(drop, bits_drop):
            bits[q] = b
        idx = 0
        for b in bits:
            idx = (idx << 1) | b
        return idx

    for i in range(dim_k):
        row_bits = [(i >> (len(keep) - 1 - k)) & 1 for k in range(len(keep))]
        for j in range(dim_k):
            col_bits = [(j >> (len(keep) - 1 - k)) & 1 for k in range(len(keep))]
            for d in range(2 ** len(drop)):
                d_bits = [(d >> (len(drop) - 1 - k)) & 1 for k in range(len(drop))]
                rho[i, j] += full[build(row_bits, d_bits), build(col_bits, d_bits)]
    return rho


def oracle_wootters(rho: np.ndarray) -> float:
    """Concurrence via eigenvalues of the non-Hermitian rho rho~ product."""
    sy = np.array([[0, -1j], [1j, 0]])
    sysy = np.kron(sy, sy)
    prod = rho @ sysy @ rho.conj() @ sysy
    evals = np.linalg.eigvals(prod)
    lam = np.sqrt(np.abs(np.sort(evals.real)[::-1]))
    return max(0.0, float(lam[0] - lam[1] - lam[2] - lam[3]))


def random_pure_state(rng: np.random.Generator, n: int = 3) -> StateVector:
    raw = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return StateVector(raw / np.linalg.norm(raw))


def random_single_qubit_unitary(rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
