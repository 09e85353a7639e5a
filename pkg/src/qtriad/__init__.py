"""Exact simulation and property-testing of three-qubit entanglement games
and the facilitated secret-sharing protocol built on them."""

from .entanglement import (
    TangleReport,
    concurrence_mixed2,
    concurrence_pure2,
    concurrence_sum,
    one_rest_concurrence,
    three_tangle,
)
from .errors import (
    FrameError,
    HandshakeError,
    InvalidBasisError,
    NormalizationError,
    QtriadError,
    TransportError,
)
from .games import (
    ClassicalStrategy,
    GameSpec,
    RuleMakerSpec,
    SweepRow,
    classical_best,
    exact_quantum_win,
    monte_carlo_win,
    per_question_wins,
    rule_maker_monte_carlo,
    rule_maker_win,
    sweep,
    xy_game_spec,
    zy_game_spec,
)
from .protocols import (
    CheatModel,
    DetectionReport,
    KeyBits,
    RoundRecord,
    SessionTranscript,
    cheat_models,
    detect_cheating,
    extract_key,
    facilitated_session,
    honest,
    outcome_flipper,
    qss_alice_inference,
    qss_session,
    random_announcer,
)
from .qcore import (
    DensityMatrix,
    MeasurementBasis,
    OutcomeBranch,
    StateVector,
    X_BASIS,
    Y_BASIS,
    Z_BASIS,
    basis_vectors,
    joint_distribution,
    lambda_basis,
    measure_single,
    product_expectation,
    reduced_density,
)
from .states import ghz_class, standard_ghz, standard_w, w_class, w_n

__version__ = "0.1.0"

__all__ = [
    "CheatModel",
    "ClassicalStrategy",
    "DensityMatrix",
    "DetectionReport",
    "FrameError",
    "GameSpec",
    "HandshakeError",
    "InvalidBasisError",
    "KeyBits",
    "MeasurementBasis",
    "NormalizationError",
    "OutcomeBranch",
    "QtriadError",
    "RoundRecord",
    "RuleMakerSpec",
    "SessionTranscript",
    "StateVector",
    "SweepRow",
    "TangleReport",
    "TransportError",
    "X_BASIS",
    "Y_BASIS",
    "Z_BASIS",
    "basis_vectors",
    "cheat_models",
    "classical_best",
    "concurrence_mixed2",
    "concurrence_pure2",
    "concurrence_sum",
    "detect_cheating",
    "exact_quantum_win",
    "extract_key",
    "facilitated_session",
    "ghz_class",
    "honest",
    "joint_distribution",
    "lambda_basis",
    "measure_single",
    "monte_carlo_win",
    "one_rest_concurrence",
    "outcome_flipper",
    "per_question_wins",
    "product_expectation",
    "qss_alice_inference",
    "qss_session",
    "random_announcer",
    "reduced_density",
    "rule_maker_monte_carlo",
    "rule_maker_win",
    "standard_ghz",
    "standard_w",
    "sweep",
    "three_tangle",
    "w_class",
    "w_n",
    "xy_game_spec",
    "zy_game_spec",
]
