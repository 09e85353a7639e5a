"""Three-player parity games: exact enumeration, classical baselines,
Monte Carlo cross-checks, and the lambda-parametrized rule-maker variant.

Exact win probabilities are always computed by full enumeration (question
sets x joint outcomes); Monte Carlo exists only as an independent
stochastic cross-check and is deterministic per (seed, trials) regardless
of worker count.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _rng
from .entanglement import concurrence_sum, three_tangle
from .qcore import (
    MeasurementBasis,
    StateVector,
    basis_by_name,
    basis_vectors,
    joint_distribution,
    lambda_basis,
)
from .states import ghz_class, standard_w, w_class, w_n

QuestionSet = tuple[str, str, str]

#: Best expected win over deterministic classical strategies for both games.
CLASSICAL_BOUND = 0.75

MC_CHUNK_SIZE = 1 << 16


@dataclass(frozen=True)
class GameSpec:
    """A parity game: allowed question sets, their distribution, and the
    answer-product each set requires for a win."""

    allowed_sets: tuple[QuestionSet, ...]
    set_probabilities: tuple[Real, ...]
    win_targets: Mapping[QuestionSet, int]

    def __post_init__(self) -> None:
        if len(self.allowed_sets) != len(self.set_probabilities):
            raise ValueError("one probability per question set required")
        if any(p < 0 for p in self.set_probabilities):
            raise ValueError("set probabilities must be nonnegative")
        if abs(float(sum(self.set_probabilities)) - 1.0) > 1e-12:
            raise ValueError("set probabilities must sum to 1")
        for qset in self.allowed_sets:
            if qset not in self.win_targets:
                raise ValueError(f"question set {qset} has no win target")
            if self.win_targets[qset] not in (1, -1):
                raise ValueError("win targets must be +1 or -1")

    @property
    def player_questions(self) -> tuple[tuple[str, ...], ...]:
        """Per-player sorted tuple of questions that player can be asked."""
        return tuple(
            tuple(sorted({qset[i] for qset in self.allowed_sets})) for i in range(3)
        )


def xy_game_spec() -> GameSpec:
    """All-X or one-X-two-Y questions; XXX wants product +1, the rest -1."""
    sets: tuple[QuestionSet, ...] = (
        ("X", "X", "X"),
        ("X", "Y", "Y"),
        ("Y", "X", "Y"),
        ("Y", "Y", "X"),
    )
    targets = {sets[0]: 1, sets[1]: -1, sets[2]: -1, sets[3]: -1}
    return GameSpec(sets, (Fraction(1, 4),) * 4, targets)


def zy_game_spec() -> GameSpec:
    """All-Z or one-Z-two-Y questions; ZZZ wants product -1, the rest +1."""
    sets: tuple[QuestionSet, ...] = (
        ("Z", "Z", "Z"),
        ("Z", "Y", "Y"),
        ("Y", "Z", "Y"),
        ("Y", "Y", "Z"),
    )
    targets = {sets[0]: -1, sets[1]: 1, sets[2]: 1, sets[3]: 1}
    return GameSpec(sets, (Fraction(1, 4),) * 4, targets)


def _set_bases(qset: QuestionSet) -> list[MeasurementBasis]:
    return [basis_by_name(q) for q in qset]


def _product_match_probability(state: StateVector, bases: Sequence[MeasurementBasis], target: int) -> float:
    total = 0.0
    for labels, p in joint_distribution(state, bases):
        prod = 1
        for v in labels:
            prod *= int(v)
        if prod == target:
            total += p
    return total


def exact_quantum_win(state: StateVector, spec: GameSpec) -> float:
    """Exact win probability of the quantum measure-what-you-are-asked strategy."""
    if state.num_qubits != 3:
        raise ValueError("game states have 3 qubits")
    win = 0.0
    for qset, prob in zip(spec.allowed_sets, spec.set_probabilities):
        win += float(prob) * _product_match_probability(state, _set_bases(qset), spec.win_targets[qset])
    return win


def per_question_wins(state: StateVector, spec: GameSpec) -> dict[QuestionSet, float]:
    """Win probability conditioned on each question set."""
    return {
        qset: _product_match_probability(state, _set_bases(qset), spec.win_targets[qset])
        for qset in spec.allowed_sets
    }


@dataclass(frozen=True)
class ClassicalStrategy:
    """Deterministic answers: per player, one +-1 answer per possible question.

    ``answers[i][j]`` replies to ``questions[i][j]``.
    """

    questions: tuple[tuple[str, ...], ...]
    answers: tuple[tuple[int, ...], ...]

    def answer(self, player: int, question: str) -> int:
        return self.answers[player][self.questions[player].index(question)]

    def encoding(self) -> tuple[int, ...]:
        return tuple(a for row in self.answers for a in row)


def classical_best(spec: GameSpec) -> tuple[Fraction, ClassicalStrategy]:
    """Exhaustive search over all deterministic strategies.

    Returns the maximum expected win (exact rational arithmetic when the
    spec's probabilities are rational) and the lexicographically-first
    maximizing strategy under the (-1 before +1) flat answer encoding.
    """
    questions = spec.player_questions
    slots = [(i, j) for i, qs in enumerate(questions) for j in range(len(qs))]
    probs = [p if isinstance(p, Fraction) else Fraction(p).limit_denominator(10**9) for p in spec.set_probabilities]
    best: Fraction | None = None
    best_strategy: ClassicalStrategy | None = None
    for flat in itertools.product((-1, 1), repeat=len(slots)):
        answers: list[list[int]] = [[0] * len(qs) for qs in questions]
        for (i, j), a in zip(slots, flat):
            answers[i][j] = a
        strategy = ClassicalStrategy(questions, tuple(tuple(row) for row in answers))
        value = Fraction(0)
        for qset, p in zip(spec.allowed_sets, probs):
            prod = 1
            for i, q in enumerate(qset):
                prod *= strategy.answer(i, q)
            if prod == spec.win_targets[qset]:
                value += p
        if best is None or value > best:
            best, best_strategy = value, strategy
    assert best is not None and best_strategy is not None
    return best, best_strategy


# ---------------------------------------------------------------------------
# Monte Carlo cross-check
# ---------------------------------------------------------------------------


def _joint_cell_table(state: StateVector, spec: GameSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per question set: cumulative cell probabilities and win flags.

    Cells are the 8 joint outcomes in lexicographic branch order; a cell
    wins when its outcome product equals the set's target.
    """
    n_sets = len(spec.allowed_sets)
    cums = np.empty((n_sets, 8))
    wins = np.empty((n_sets, 8), dtype=bool)
    for s, qset in enumerate(spec.allowed_sets):
        dist = joint_distribution(state, _set_bases(qset))
        probs = np.array([p for _, p in dist])
        cums[s] = np.cumsum(probs)
        products = np.array([math.prod(int(v) for v in labels) for labels, _ in dist])
        wins[s] = products == spec.win_targets[qset]
    set_cum = np.cumsum(np.array([float(p) for p in spec.set_probabilities]))
    return set_cum, cums, wins


def _mc_chunk_wins(seed: int, chunk_idx: int, size: int, set_cum: np.ndarray, cums: np.ndarray, wins: np.ndarray) -> int:
    gen = _rng.substream(seed, _rng.MC_CHUNK, chunk_idx)
    u = gen.random((size, 2))
    set_idx = np.searchsorted(set_cum, u[:, 0], side="right").clip(max=len(set_cum) - 1)
    rows = cums[set_idx]
    cells = (u[:, 1, None] >= rows).sum(axis=1).clip(max=cums.shape[1] - 1)
    return int(wins[set_idx, cells].sum())


def monte_carlo_win(
    state: StateVector,
    spec: GameSpec,
    trials: int,
    seed: int,
    workers: int = 1,
) -> tuple[float, float]:
    """Sampled win rate and its binomial standard error sqrt(p(1-p)/trials).

    Trials are split into fixed-size chunks, each drawing from its own
    counter-indexed substream of ``seed``, so the estimate is a pure
    function of (seed, trials) independent of ``workers``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    tables = _joint_cell_table(state, spec)
    chunks = [
        (i, min(MC_CHUNK_SIZE, trials - i * MC_CHUNK_SIZE))
        for i in range((trials + MC_CHUNK_SIZE - 1) // MC_CHUNK_SIZE)
    ]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            totals = pool.map(lambda c: _mc_chunk_wins(seed, c[0], c[1], *tables), chunks)
            won = sum(totals)
    else:
        won = sum(_mc_chunk_wins(seed, i, size, *tables) for i, size in chunks)
    p_hat = won / trials
    return p_hat, math.sqrt(p_hat * (1.0 - p_hat) / trials)


# ---------------------------------------------------------------------------
# Rule-maker game
# ---------------------------------------------------------------------------

#: Winning products declared after the first / second basis vector occurs.
RULE_B0 = {"X": 1, "Z": -1}
RULE_B1 = {"X": -1, "Z": 1}


@dataclass(frozen=True)
class RuleMakerSpec:
    """The rule-selection game: the third player measures qubit C in a
    lambda basis; branch b0 activates RULE_B0, b1 activates RULE_B1; the
    asked question (X or Z) is answered by both remaining players measuring
    in that basis."""

    lambda_angle: float
    question_probabilities: Mapping[str, float] | None = None

    def __post_init__(self) -> None:
        if not math.isfinite(self.lambda_angle):
            raise ValueError("lambda angle must be finite")
        probs = self.questions()
        if set(probs) != {"X", "Z"} or abs(sum(probs.values()) - 1.0) > 1e-12:
            raise ValueError("question probabilities must cover X and Z and sum to 1")

    def questions(self) -> dict[str, float]:
        if self.question_probabilities is None:
            return {"X": 0.5, "Z": 0.5}
        return dict(self.question_probabilities)


def collapse_third_qubit(state: StateVector, lam: float) -> list[tuple[str, float, StateVector | None]]:
    """Measure qubit C in the lambda basis and factor it out.

    Returns [(label, probability, two-qubit post state or None)] for b0, b1.
    """
    if state.num_qubits != 3:
        raise ValueError("expected a 3-qubit state")
    rows = np.stack([v.amps for v in basis_vectors(lambda_basis(lam))])
    tens = state.tensor()
    projected = np.tensordot(rows.conj(), tens, axes=([1], [2]))  # (branch, A, B)
    out: list[tuple[str, float, StateVector | None]] = []
    for i, label in enumerate(("b0", "b1")):
        flat = projected[i].reshape(-1)
        p = float(np.sum(np.abs(flat) ** 2))
        if p < 1e-15:
            out.append((label, 0.0, None))
        else:
            out.append((label, p, StateVector(flat / math.sqrt(p))))
    return out


def rule_maker_win(state: StateVector, spec: RuleMakerSpec) -> float:
    """Exact team win probability of the rule-maker game."""
    qprobs = spec.questions()
    win = 0.0
    for (_label, p_branch, collapsed), rule in zip(
        collapse_third_qubit(state, spec.lambda_angle), (RULE_B0, RULE_B1)
    ):
        if collapsed is None:
            continue
        for q, p_q in qprobs.items():
            basis = basis_by_name(q)
            win += p_branch * p_q * _product_match_probability(collapsed, [basis, basis], rule[q])
    return win


def rule_maker_monte_carlo(
    state: StateVector, spec: RuleMakerSpec, trials: int, seed: int, workers: int = 1
) -> tuple[float, float]:
    """Sampled rule-maker win rate; same determinism contract as
    :func:`monte_carlo_win`."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    qprobs = spec.questions()
    q_names = ("X", "Z")
    branches = collapse_third_qubit(state, spec.lambda_angle)
    branch_cum = np.cumsum([p for _, p, _ in branches])
    q_cum = np.cumsum([qprobs[q] for q in q_names])
    # cell tables indexed [branch, question] -> cumulative probs over 4 outcomes
    cums = np.zeros((2, 2, 4))
    wins = np.zeros((2, 2, 4), dtype=bool)
    for b, ((_label, _p, collapsed), rule) in enumerate(zip(branches, (RULE_B0, RULE_B1))):
        for qi, q in enumerate(q_names):
            if collapsed is None:
                cums[b, qi] = 1.0  # never sampled; keep a valid CDF
                continue
            basis = basis_by_name(q)
            dist = joint_distribution(collapsed, [basis, basis])
            cums[b, qi] = np.cumsum([p for _, p in dist])
            products = np.array([int(a) * int(bv) for (a, bv), _ in dist])
            wins[b, qi] = products == rule[q]

    def chunk_wins(chunk_idx: int, size: int) -> int:
        gen = _rng.substream(seed, _rng.MC_CHUNK, chunk_idx)
        u = gen.random((size, 3))
        b = np.searchsorted(branch_cum, u[:, 0], side="right").clip(max=1)
        q = np.searchsorted(q_cum, u[:, 1], side="right").clip(max=1)
        rows = cums[b, q]
        cells = (u[:, 2, None] >= rows).sum(axis=1).clip(max=3)
        return int(wins[b, q, cells].sum())

    chunks = [
        (i, min(MC_CHUNK_SIZE, trials - i * MC_CHUNK_SIZE))
        for i in range((trials + MC_CHUNK_SIZE - 1) // MC_CHUNK_SIZE)
    ]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            won = sum(pool.map(lambda c: chunk_wins(*c), chunks))
    else:
        won = sum(chunk_wins(i, size) for i, size in chunks)
    p_hat = won / trials
    return p_hat, math.sqrt(p_hat * (1.0 - p_hat) / trials)


# ---------------------------------------------------------------------------
# Closed forms (valid on their documented slices; the enumerator is the
# ground truth everywhere else)
# ---------------------------------------------------------------------------


def ghz_xy_win_closed(theta: float) -> float:
    """(1 + sin 2t)/2 for sin(t)|000> + cos(t)|111> in the XY game."""
    return 0.5 * (1.0 + math.sin(2.0 * theta))


def w_zy_win_closed(a: float, b: float, c: float) -> float:
    """(5/2 + ab + bc + ca)/4 for real nonnegative single-excitation states
    in the ZY game."""
    return 0.25 * (2.5 + a * b + b * c + a * c)


def w_n_zy_win_closed(n: int) -> float:
    """ZY-game win of the integer-indexed family at zero phases."""
    return (5.0 + 5.0 * n + math.sqrt(n + 1) + math.sqrt(n) * (math.sqrt(n + 1) + 1.0)) / (8.0 * (n + 1))


def w_rule_maker_win_closed(lam: float) -> float:
    """(1 + 10 sin^2 lambda)/12 for the balanced single-excitation state;
    derived by enumeration over branch x question x joint outcomes."""
    return (1.0 + 10.0 * math.sin(lam) ** 2) / 12.0


def ghz_rule_maker_curve(lam: float) -> float:
    """(2 - sin 2 lambda)/4: enumerated rule-maker win for the maximally
    entangled GHZ resource. Equals 0.5 only at the endpoints 0 and pi/2."""
    return (2.0 - math.sin(2.0 * lam)) / 4.0


#: Report note for the GHZ rule-maker sweep; the 50%-for-all-lambda figure
#: sometimes quoted for this resource holds only at the endpoints.
RULE_MAKER_GHZ_NOTE = (
    "GHZ rule-maker success is often quoted as 50% independent of lambda; "
    "direct enumeration gives (2 - sin 2*lambda)/4, which equals 0.5 only at "
    "lambda = 0 and lambda = pi/2. The enumerated curve is reported."
)


# ---------------------------------------------------------------------------
# Figure sweeps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    """One sweep sample: the swept parameter, the x-axis quantity the
    corresponding figure plots, and the exact win probability."""

    parameter: float
    x_measure: float
    win: float


def random_simplex_points(count: int, seed: int) -> list[tuple[float, float, float]]:
    """Seeded real-nonnegative amplitude triples with a^2+b^2+c^2 = 1,
    uniform over the probability simplex of squared amplitudes."""
    if count < 1:
        raise ValueError("count must be >= 1")
    gen = _rng.substream(seed, _rng.SIMPLEX)
    weights = gen.dirichlet((1.0, 1.0, 1.0), size=count)
    amps = np.sqrt(weights)
    return [tuple(float(v) for v in row) for row in amps]


def sweep(family: str, grid: Iterable, state: StateVector | None = None) -> list[SweepRow]:
    """Evaluate one figure family over a parameter grid.

    Families: ``ghz_theta`` (x = tangle), ``w_simplex`` (grid of (a, b, c)
    triples, x = concurrence sum), ``w_n`` (x = concurrence sum; the
    parameter column carries n), ``rule_maker_lambda`` (x = lambda; state
    defaults to the balanced single-excitation state).
    """
    import warnings

    rows: list[SweepRow] = []
    if family == "ghz_theta":
        game = xy_game_spec()
        for theta in grid:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                psi = ghz_class(float(theta))
            rows.append(SweepRow(float(theta), three_tangle(psi).tau, exact_quantum_win(psi, game)))
    elif family == "w_simplex":
        game = zy_game_spec()
        for i, (a, b, c) in enumerate(grid):
            psi = w_class(a, b, c)
            rows.append(SweepRow(float(i), concurrence_sum(psi), exact_quantum_win(psi, game)))
    elif family == "w_n":
        game = zy_game_spec()
        for n in grid:
            psi = w_n(int(n))
            rows.append(SweepRow(float(n), concurrence_sum(psi), exact_quantum_win(psi, game)))
    elif family == "rule_maker_lambda":
        resource = state if state is not None else standard_w()
        for lam in grid:
            rows.append(
                SweepRow(float(lam), float(lam), rule_maker_win(resource, RuleMakerSpec(float(lam))))
            )
    else:
        raise ValueError(f"unknown sweep family {family!r}")
    if not rows:
        raise ValueError("sweep grid must be nonempty")
    return rows
