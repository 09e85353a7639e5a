"""Constructors for the three-qubit state families under study.

Two inequivalent entanglement classes: sin(t)|000> + cos(t)|111> and the
single-excitation family a|100> + b|010> + c|001>, plus the integer-indexed
subfamily (|100> + sqrt(n) e^{ig}|010> + sqrt(n+1) e^{id}|001>)/sqrt(2(n+1))
known to enable perfect teleportation and dense coding.
"""

from __future__ import annotations

import cmath
import math
import warnings

import numpy as np

from .errors import NormalizationError
from .qcore import NORM_TOL, StateVector

# Amplitude indices under the MSB-first qubit convention.
_I000, _I001, _I010, _I100, _I111 = 0, 1, 2, 4, 7


class ParameterRangeWarning(UserWarning):
    """Parameter accepted but outside the range the closed forms assume."""


def ghz_class(theta: float) -> StateVector:
    """sin(theta)|000> + cos(theta)|111>.

    theta is accepted on [0, pi/2]; values outside (0, pi/4] (the range the
    reference analysis assumes) trigger a ParameterRangeWarning.
    """
    if not math.isfinite(theta):
        raise ValueError("theta must be finite")
    if not 0.0 <= theta <= math.pi / 2 + 1e-12:
        raise ValueError(f"theta {theta} outside accepted range [0, pi/2]")
    if not 0.0 < theta <= math.pi / 4 + 1e-12:
        warnings.warn(
            f"theta={theta} is outside (0, pi/4]; closed-form results assume that range",
            ParameterRangeWarning,
            stacklevel=2,
        )
    amps = np.zeros(8, dtype=complex)
    amps[_I000] = math.sin(theta)
    amps[_I111] = math.cos(theta)
    return StateVector(amps)


def w_class(a: complex, b: complex, c: complex) -> StateVector:
    """a|100> + b|010> + c|001> with |a|^2+|b|^2+|c|^2 = 1.

    Complex amplitudes are accepted; the closed-form win/concurrence
    formulas in this package are documented for the real nonnegative slice,
    with the enumerators authoritative elsewhere.
    """
    norm_sq = abs(a) ** 2 + abs(b) ** 2 + abs(c) ** 2
    if abs(norm_sq - 1.0) > NORM_TOL:
        raise NormalizationError(f"|a|^2+|b|^2+|c|^2 = {norm_sq} deviates from 1 beyond {NORM_TOL}")
    amps = np.zeros(8, dtype=complex)
    amps[_I100] = a
    amps[_I010] = b
    amps[_I001] = c
    return StateVector(amps)


def w_n_amplitudes(n: int, gamma: float = 0.0, delta: float = 0.0) -> tuple[complex, complex, complex]:
    """The (a, b, c) amplitudes induced by the integer-indexed W family."""
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    root = math.sqrt(2.0 * (1.0 + n))
    return (
        1.0 / root,
        math.sqrt(n) * cmath.exp(1j * gamma) / root,
        math.sqrt(n + 1) * cmath.exp(1j * delta) / root,
    )


def w_n(n: int, gamma: float = 0.0, delta: float = 0.0) -> StateVector:
    """(|100> + sqrt(n) e^{i gamma}|010> + sqrt(n+1) e^{i delta}|001>) / sqrt(2(n+1))."""
    a, b, c = w_n_amplitudes(n, gamma, delta)
    return w_class(a, b, c)


def standard_ghz() -> StateVector:
    """(|000> + |111>)/sqrt(2): the class maximum, three-tangle 1."""
    s = 1.0 / math.sqrt(2.0)
    amps = np.zeros(8, dtype=complex)
    amps[_I000] = s
    amps[_I111] = s
    return StateVector(amps)


def standard_w() -> StateVector:
    """(|100> + |010> + |001>)/sqrt(3): concurrence-sum maximum 2."""
    s = 1.0 / math.sqrt(3.0)
    return w_class(s, s, s)
