"""Exact dense statevector core for 1-3 qubits with projective single-qubit
measurement in X/Y/Z and one-parameter (lambda) bases.

Index convention: bit i of an amplitude index encodes qubit i, with qubit 0
(Alice) the most-significant bit, so a 3-qubit index reads |q0 q1 q2> left to
right. All operations are pure; values are immutable after construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidBasisError, NormalizationError

NORM_TOL = 1e-9
#: Branch probabilities below this are treated as exactly zero (no post state).
ZERO_BRANCH_TOL = 1e-15

BasisKind = str  # one of "X", "Y", "Z", "Lambda"


@dataclass(frozen=True)
class MeasurementBasis:
    """A single-qubit projective measurement basis.

    X/Y/Z carry outcome labels +1/-1 (eigenvalue convention, +1 first).
    Lambda(angle) carries labels "b0"/"b1" for its two vectors
    sin(a)|0> - cos(a)|1> and cos(a)|0> + sin(a)|1>: callers dispatch on
    which vector occurred, not on an eigenvalue.
    """

    kind: BasisKind
    lambda_angle: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("X", "Y", "Z", "Lambda"):
            raise InvalidBasisError(f"unknown basis kind {self.kind!r}")
        if self.kind == "Lambda":
            if self.lambda_angle is None or not math.isfinite(self.lambda_angle):
                raise InvalidBasisError("Lambda basis requires a finite angle")
        elif self.lambda_angle is not None:
            raise InvalidBasisError(f"{self.kind} basis takes no angle")

    @property
    def labels(self) -> tuple[int, int] | tuple[str, str]:
        if self.kind == "Lambda":
            return ("b0", "b1")
        return (1, -1)


X_BASIS = MeasurementBasis("X")
Y_BASIS = MeasurementBasis("Y")
Z_BASIS = MeasurementBasis("Z")


def lambda_basis(angle: float) -> MeasurementBasis:
    return MeasurementBasis("Lambda", float(angle))


def basis_by_name(name: str) -> MeasurementBasis:
    try:
        return {"X": X_BASIS, "Y": Y_BASIS, "Z": Z_BASIS}[name]
    except KeyError:
        raise InvalidBasisError(f"unknown basis name {name!r}") from None


class StateVector:
    """Normalized pure state of 1-3 qubits over the computational basis.

    Construction validates finiteness and normalization (tolerance 1e-9);
    out-of-tolerance inputs are rejected, never silently renormalized.
    """

    __slots__ = ("_amps", "_n")

    def __init__(self, amps: Sequence[complex] | np.ndarray):
        arr = np.asarray(amps, dtype=complex).reshape(-1).copy()
        n = int(round(math.log2(arr.size))) if arr.size else 0
        if arr.size != 2**n or n not in (1, 2, 3):
            raise NormalizationError(f"amplitude count {arr.size} is not 2^n for n in 1..3")
        if not np.all(np.isfinite(arr.view(float))):
            raise NormalizationError("amplitudes must be finite")
        norm_sq = float(np.sum(np.abs(arr) ** 2))
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise NormalizationError(f"state norm^2 = {norm_sq} deviates from 1 beyond {NORM_TOL}")
        arr.setflags(write=False)
        self._amps = arr
        self._n = n

    @property
    def amps(self) -> np.ndarray:
        return self._amps

    @property
    def num_qubits(self) -> int:
        return self._n

    def amplitude(self, bits: Sequence[int]) -> complex:
        """Amplitude of the computational basis ket given per-qubit bits."""
        if len(bits) != self._n:
            raise ValueError(f"expected {self._n} bits")
        idx = 0
        for b in bits:
            idx = (idx << 1) | (int(b) & 1)
        return complex(self._amps[idx])

    def tensor(self) -> np.ndarray:
        return self._amps.reshape((2,) * self._n)

    def allclose(self, other: "StateVector", tol: float = 1e-12) -> bool:
        return self._n == other._n and bool(np.allclose(self._amps, other._amps, atol=tol, rtol=0.0))

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"StateVector({self._amps.tolist()})"


class DensityMatrix:
    """Density operator of 1-3 qubits.

    Validated Hermitian (1e-9), unit trace (1e-9) and positive semidefinite
    (eigenvalues >= -1e-9). Entanglement measures consume the 1- and 2-qubit
    cases; 3 qubits only arises from tracing out nothing.
    """

    __slots__ = ("_mat", "_n")

    def __init__(self, entries: np.ndarray):
        mat = np.asarray(entries, dtype=complex).copy()
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise NormalizationError("density matrix must be square")
        n = int(round(math.log2(mat.shape[0])))
        if mat.shape[0] != 2**n or n not in (1, 2, 3):
            raise NormalizationError(f"dimension {mat.shape[0]} is not 2^n for n in 1..3")
        if not np.all(np.isfinite(mat.view(float))):
            raise NormalizationError("density matrix entries must be finite")
        if not np.allclose(mat, mat.conj().T, atol=NORM_TOL, rtol=0.0):
            raise NormalizationError("density matrix is not Hermitian within tolerance")
        tr = complex(np.trace(mat))
        if abs(tr - 1.0) > NORM_TOL:
            raise NormalizationError(f"trace {tr} deviates from 1 beyond {NORM_TOL}")
        evals = np.linalg.eigvalsh(mat)
        if float(evals.min()) < -NORM_TOL:
            raise NormalizationError(f"density matrix has negative eigenvalue {evals.min()}")
        mat.setflags(write=False)
        self._mat = mat
        self._n = n

    @property
    def matrix(self) -> np.ndarray:
        return self._mat

    @property
    def num_qubits(self) -> int:
        return self._n

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"DensityMatrix(n={self._n})"


@dataclass(frozen=True)
class OutcomeBranch:
    """One branch of a projective single-qubit measurement.

    ``post_state`` keeps all qubits (collapsed and renormalized) and is None
    for zero-probability branches.
    """

    label: int | str
    probability: float
    post_state: StateVector | None = field(default=None)


def basis_vectors(basis: MeasurementBasis) -> tuple[StateVector, StateVector]:
    """Return the two basis vectors as single-qubit states.

    X/Y/Z return the (+1, -1) eigenvectors (Z: +1 is |0>); Lambda returns
    (b0, b1).
    """
    s = 1.0 / math.sqrt(2.0)
    if basis.kind == "X":
        return StateVector([s, s]), StateVector([s, -s])
    if basis.kind == "Y":
        return StateVector([s, 1j * s]), StateVector([s, -1j * s])
    if basis.kind == "Z":
        return StateVector([1.0, 0.0]), StateVector([0.0, 1.0])
    a = basis.lambda_angle
    assert a is not None
    return (
        StateVector([math.sin(a), -math.cos(a)]),
        StateVector([math.cos(a), math.sin(a)]),
    )


def _basis_matrix(basis: MeasurementBasis) -> np.ndarray:
    """2x2 matrix whose rows are the basis vectors (first row = first label)."""
    plus, minus = basis_vectors(basis)
    return np.stack([plus.amps, minus.amps])


def measure_single(state: StateVector, qubit: int, basis: MeasurementBasis) -> tuple[OutcomeBranch, OutcomeBranch]:
    """Projectively measure one qubit, returning both outcome branches."""
    n = state.num_qubits
    if not 0 <= qubit < n:
        raise ValueError(f"qubit index {qubit} out of range for {n}-qubit state")
    rows = _basis_matrix(basis)
    tens = state.tensor()
    # Project: contract the measured axis with conj(basis vector).
    projected = np.tensordot(rows.conj(), tens, axes=([1], [qubit]))  # (2, ...rest)
    probs = np.sum(np.abs(projected.reshape(2, -1)) ** 2, axis=1)
    kets = basis_vectors(basis)
    branches = []
    for i, label in enumerate(basis.labels):
        p = float(probs[i])
        if p < ZERO_BRANCH_TOL:
            branches.append(OutcomeBranch(label, 0.0, None))
            continue
        # Rebuild the full collapsed state: measured qubit replaced by its ket.
        post = np.multiply.outer(kets[i].amps, projected[i])
        post = np.moveaxis(post, 0, qubit) / math.sqrt(p)
        branches.append(OutcomeBranch(label, p, StateVector(post.reshape(-1))))
    return branches[0], branches[1]


def joint_distribution(
    state: StateVector, bases: Sequence[MeasurementBasis]
) -> list[tuple[tuple[int | str, ...], float]]:
    """Exact joint outcome distribution for measuring every qubit at once.

    Returns all 2^n (outcome-tuple, probability) pairs in lexicographic
    order of branch indices; probabilities sum to 1.
    """
    n = state.num_qubits
    if len(bases) != n:
        raise ValueError(f"expected {n} bases, got {len(bases)}")
    tens = state.tensor()
    for q, basis in enumerate(bases):
        rows = _basis_matrix(basis).conj()
        tens = np.moveaxis(np.tensordot(rows, tens, axes=([1], [q])), 0, q)
    probs = np.abs(tens.reshape(-1)) ** 2
    out: list[tuple[tuple[int | str, ...], float]] = []
    for idx in range(2**n):
        labels = tuple(bases[q].labels[(idx >> (n - 1 - q)) & 1] for q in range(n))
        out.append((labels, float(probs[idx])))
    return out


def product_expectation(state: StateVector, bases: Sequence[MeasurementBasis]) -> float:
    """Expectation of the product of +-1 outcomes over all qubits.

    Lambda bases carry unlabeled branches and are rejected.
    """
    if any(b.kind == "Lambda" for b in bases):
        raise InvalidBasisError("product expectation is undefined for Lambda-basis outcomes")
    total = 0.0
    for labels, p in joint_distribution(state, bases):
        prod = 1
        for v in labels:
            prod *= int(v)
        total += prod * p
    return total


def reduced_density(state: StateVector, keep: Iterable[int]) -> DensityMatrix:
    """Partial trace onto the kept qubits (ascending order)."""
    keep_sorted = sorted(set(int(q) for q in keep))
    n = state.num_qubits
    if not keep_sorted:
        raise ValueError("keep set must be nonempty")
    if keep_sorted[0] < 0 or keep_sorted[-1] >= n:
        raise ValueError(f"keep set {keep_sorted} out of range for {n} qubits")
    drop = [q for q in range(n) if q not in keep_sorted]
    tens = state.tensor()
    rho = np.tensordot(tens, tens.conj(), axes=(drop, drop))
    k = len(keep_sorted)
    return DensityMatrix(rho.reshape(2**k, 2**k))
