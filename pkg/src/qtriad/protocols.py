"""Round-level simulation of two three-party secret-sharing protocols.

The entanglement-based scheme measures a maximally entangled three-qubit
state in random X/Y bases and sifts on the parity-correlated basis triples;
the facilitated scheme has Charlie measure his qubit of a balanced
single-excitation state in a lambda basis, splitting rounds into a message
mode (key generation) and a control mode (honesty checks against the
branch-b1 parity rules, 75% expected compliance).

Sessions are generated columnar (numpy arrays over rounds) from named
substreams of one seed, so transcripts are bit-reproducible and cheat
models can never perturb basis statistics. The transport harness replays
the same plan through wire messages.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np

from . import _rng
from .errors import QtriadError
from .games import RULE_B1, collapse_third_qubit
from .qcore import StateVector, basis_by_name, joint_distribution
from .states import standard_ghz, standard_w

TRANSCRIPT_VERSION = "transcript-v1"

PROTOCOL_QSS = "qss"
PROTOCOL_FACILITATED = "facilitated"

POLICY_SIFT_DISCARD = "sift-discard"
POLICY_CHARLIE_ANNOUNCES = "charlie-announces"
POLICIES = (POLICY_SIFT_DISCARD, POLICY_CHARLIE_ANNOUNCES)

MODE_MESSAGE = "Message"
MODE_CONTROL = "Control"
MODE_UNRESOLVED = "Unresolved"

#: Basis triples (dealer, first recipient, second recipient) kept by sifting.
QSS_ACCEPTED_TRIPLES = (("X", "X", "X"), ("X", "Y", "Y"), ("Y", "X", "Y"), ("Y", "Y", "X"))

#: Conditional state of the dealer's qubit after both recipients measure,
#: keyed by ((bob_basis, bob_sign), (charlie_basis, charlie_sign)).
QSS_INFERENCE_TABLE: dict[tuple[tuple[str, int], tuple[str, int]], tuple[str, int]] = {
    (("X", 1), ("X", 1)): ("X", 1),
    (("X", 1), ("X", -1)): ("X", -1),
    (("X", 1), ("Y", 1)): ("Y", -1),
    (("X", 1), ("Y", -1)): ("Y", 1),
    (("X", -1), ("X", 1)): ("X", -1),
    (("X", -1), ("X", -1)): ("X", 1),
    (("X", -1), ("Y", 1)): ("Y", 1),
    (("X", -1), ("Y", -1)): ("Y", -1),
    (("Y", 1), ("X", 1)): ("Y", -1),
    (("Y", 1), ("X", -1)): ("Y", 1),
    (("Y", 1), ("Y", 1)): ("X", -1),
    (("Y", 1), ("Y", -1)): ("X", 1),
    (("Y", -1), ("X", 1)): ("Y", 1),
    (("Y", -1), ("X", -1)): ("Y", -1),
    (("Y", -1), ("Y", 1)): ("X", 1),
    (("Y", -1), ("Y", -1)): ("X", -1),
}


def qss_alice_inference(bob: tuple[str, int], charlie: tuple[str, int]) -> tuple[str, int]:
    """Dealer state implied by the recipients' (basis, sign) results."""
    try:
        return QSS_INFERENCE_TABLE[(bob, charlie)]
    except KeyError:
        raise ValueError(f"not X/Y-basis labels: {bob}, {charlie}") from None


# ---------------------------------------------------------------------------
# Cheat models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CheatModel:
    """How a party misreports outcomes. Only announced/recorded values are
    altered; the underlying quantum sampling is untouched.

    kinds: ``honest``; ``random`` (announced control-round outcomes replaced
    by fresh uniform +-1); ``flip`` (every recorded outcome negated).
    """

    kind: str
    party: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("honest", "random", "flip"):
            raise ValueError(f"unknown cheat kind {self.kind!r}")
        if self.kind == "honest":
            if self.party is not None:
                raise ValueError("honest model names no party")
        elif self.party not in ("alice", "bob"):
            raise ValueError("cheat model requires party 'alice' or 'bob'")

    def label(self) -> str:
        return self.kind if self.party is None else f"{self.kind}:{self.party}"


def honest() -> CheatModel:
    return CheatModel("honest")


def random_announcer(party: str) -> CheatModel:
    return CheatModel("random", party)


def outcome_flipper(party: str) -> CheatModel:
    return CheatModel("flip", party)


def cheat_models() -> dict[str, str]:
    """Registry of cheat model kinds and their announcement semantics."""
    return {
        "honest": "recorded outcomes equal sampled outcomes",
        "random": "announced control-round outcomes are uniform +-1, state-independent",
        "flip": "every recorded outcome is the negated sampled outcome",
    }


def parse_cheat(text: str) -> CheatModel:
    """Parse 'honest', 'random:bob', 'flip:alice' style labels."""
    if text == "honest":
        return honest()
    kind, sep, party = text.partition(":")
    if not sep:
        raise ValueError(f"cheat spec {text!r} must be 'honest' or '<kind>:<party>'")
    return CheatModel(kind, party)


# ---------------------------------------------------------------------------
# Transcript containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RoundRecord:
    """One protocol round as recorded in a transcript.

    Facilitated rounds carry ``charlie_outcome`` ('b0'/'b1') and no
    ``charlie_basis`` (his basis is the session lambda basis); sifted-out
    rounds carry no outcomes. Entanglement-based rounds carry all three
    bases, +-1 signs for everyone, and mode ``Unresolved``.
    """

    round_id: int
    mode: str
    accepted: bool
    alice_basis: str
    bob_basis: str
    alice_outcome: int | None
    bob_outcome: int | None
    charlie_basis: str | None = None
    charlie_outcome: str | None = None
    charlie_sign: int | None = None

    def to_json_obj(self) -> dict:
        return {
            "record": "round",
            "round_id": self.round_id,
            "mode": self.mode,
            "accepted": self.accepted,
            "alice_basis": self.alice_basis,
            "bob_basis": self.bob_basis,
            "charlie_basis": self.charlie_basis,
            "alice_outcome": self.alice_outcome,
            "bob_outcome": self.bob_outcome,
            "charlie_outcome": self.charlie_outcome,
            "charlie_sign": self.charlie_sign,
        }


class SessionTranscript:
    """Columnar per-round records of one protocol session.

    Columns are numpy arrays over rounds; absent outcomes are 0 in the
    int8 outcome columns. ``rounds`` materializes RoundRecord objects
    lazily; analysis functions work on the columns directly.
    """

    def __init__(self, protocol: str, params: dict, columns: dict[str, np.ndarray], complete: bool = True):
        self.protocol = protocol
        self.params = dict(params)
        self.columns = columns
        self.complete = bool(complete)
        ids = columns["round_id"]
        if ids.size and not np.array_equal(ids, np.arange(ids.size)):
            raise ValueError("round ids must be dense from 0")

    @property
    def num_rounds(self) -> int:
        return int(self.columns["round_id"].size)

    @cached_property
    def rounds(self) -> list[RoundRecord]:
        cols = self.columns
        facilitated = self.protocol == PROTOCOL_FACILITATED
        out = []
        for i in range(self.num_rounds):
            a_out = int(cols["alice_outcome"][i])
            b_out = int(cols["bob_outcome"][i])
            out.append(
                RoundRecord(
                    round_id=i,
                    mode=str(cols["mode"][i]) if facilitated else MODE_UNRESOLVED,
                    accepted=bool(cols["accepted"][i]),
                    alice_basis=str(cols["alice_basis"][i]),
                    bob_basis=str(cols["bob_basis"][i]),
                    alice_outcome=a_out if a_out else None,
                    bob_outcome=b_out if b_out else None,
                    charlie_basis=str(cols["charlie_basis"][i]) if not facilitated else None,
                    charlie_outcome=str(cols["charlie_outcome"][i]) if facilitated else None,
                    charlie_sign=int(cols["charlie_sign"][i]) if not facilitated else None,
                )
            )
        return out

    def summary_obj(self) -> dict:
        accepted = self.columns["accepted"]
        obj = {
            "record": "summary",
            "version": TRANSCRIPT_VERSION,
            "protocol": self.protocol,
            "params": self.params,
            "rounds": self.num_rounds,
            "accepted_rounds": int(accepted.sum()),
            "complete": self.complete,
        }
        if self.protocol == PROTOCOL_FACILITATED:
            mode = self.columns["mode"]
            obj["message_rounds"] = int((mode == MODE_MESSAGE).sum())
            obj["control_rounds"] = int((mode == MODE_CONTROL).sum())
        return obj

    def to_jsonl(self) -> str:
        lines = [json.dumps(r.to_json_obj(), sort_keys=True, separators=(",", ":")) for r in self.rounds]
        lines.append(json.dumps(self.summary_obj(), sort_keys=True, separators=(",", ":")))
        return "\n".join(lines) + "\n"

    def write_jsonl(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_jsonl())


def transcript_from_jsonl(lines: Iterable[str]) -> SessionTranscript:
    """Rebuild a transcript from its line-oriented serialization."""
    rounds = []
    summary = None
    for line in lines:
        line = line.strip()
        if not line:
            continue
        obj = json.loads(line)
        if obj.get("record") == "summary":
            summary = obj
        else:
            rounds.append(obj)
    if summary is None:
        raise ValueError("transcript has no summary line")
    protocol = summary["protocol"]
    facilitated = protocol == PROTOCOL_FACILITATED
    m = len(rounds)
    cols: dict[str, np.ndarray] = {
        "round_id": np.array([r["round_id"] for r in rounds], dtype=np.int64),
        "accepted": np.array([r["accepted"] for r in rounds], dtype=bool),
        "alice_basis": np.array([r["alice_basis"] for r in rounds], dtype="<U1"),
        "bob_basis": np.array([r["bob_basis"] for r in rounds], dtype="<U1"),
        "alice_outcome": np.array([r["alice_outcome"] or 0 for r in rounds], dtype=np.int8),
        "bob_outcome": np.array([r["bob_outcome"] or 0 for r in rounds], dtype=np.int8),
    }
    if facilitated:
        cols["mode"] = np.array([r["mode"] for r in rounds], dtype="<U10")
        cols["charlie_outcome"] = np.array([r["charlie_outcome"] for r in rounds], dtype="<U2")
    else:
        cols["mode"] = np.full(m, MODE_UNRESOLVED, dtype="<U10")
        cols["charlie_basis"] = np.array([r["charlie_basis"] for r in rounds], dtype="<U1")
        cols["charlie_sign"] = np.array([r["charlie_sign"] or 0 for r in rounds], dtype=np.int8)
    return SessionTranscript(protocol, summary["params"], cols, complete=summary.get("complete", True))


# ---------------------------------------------------------------------------
# Exact per-round distributions (enumeration backbone)
# ---------------------------------------------------------------------------


def _cell_cums_2q(state: StateVector | None, basis_name: str) -> tuple[np.ndarray, np.ndarray]:
    """Cumulative probabilities over the 4 joint outcomes (+1-major order)
    of measuring both qubits of ``state`` in the named basis."""
    if state is None:
        return np.ones(4), np.array([1, 1, -1, -1], dtype=np.int8)
    basis = basis_by_name(basis_name)
    dist = joint_distribution(state, [basis, basis])
    probs = np.array([p for _, p in dist])
    return np.cumsum(probs), np.array([a for (a, _), _ in dist], dtype=np.int8)


def facilitated_round_tables(lam: float) -> dict:
    """Collapsed-branch states and outcome tables for the facilitated scheme."""
    branches = collapse_third_qubit(standard_w(), lam)
    p_b0 = branches[0][1]
    cums = np.zeros((2, 2, 4))  # [branch][basis X=0,Z=1] -> cumulative cell probs
    a_signs = np.array([1, 1, -1, -1], dtype=np.int8)
    b_signs = np.array([1, -1, 1, -1], dtype=np.int8)
    for bi, (_, _, collapsed) in enumerate(branches):
        for qi, q in enumerate(("X", "Z")):
            cums[bi, qi], _ = _cell_cums_2q(collapsed, q)
    return {"p_b0": p_b0, "cums": cums, "a_signs": a_signs, "b_signs": b_signs, "branches": branches}


def mode_probabilities(lam: float) -> tuple[float, float]:
    """(P(message), P(control)) = probabilities of Charlie's b0/b1 branches."""
    branches = collapse_third_qubit(standard_w(), lam)
    return branches[0][1], branches[1][1]


def expected_control_compliance(lam: float = math.pi / 2) -> float:
    """Exact expected fraction of control rounds matching the b1 parity
    rules (Z rounds want product +1, X rounds product -1), at equal basis
    weights."""
    _, _, collapsed = collapse_third_qubit(standard_w(), lam)[1]
    if collapsed is None:
        raise QtriadError("control branch has zero probability at this lambda")
    total = 0.0
    for q, target in (("X", RULE_B1["X"]), ("Z", RULE_B1["Z"])):
        basis = basis_by_name(q)
        p = sum(pr for (a, b), pr in joint_distribution(collapsed, [basis, basis]) if int(a) * int(b) == target)
        total += 0.5 * p
    return total


def accepted_round_distribution(policy: str, lam: float = math.pi / 2) -> dict[tuple, float]:
    """Exact distribution of (mode, basis, alice_outcome, bob_outcome) for
    accepted rounds, computed by enumerating the policy's basis draws.

    Both policies must induce the same distribution (the sift conditions on
    equal independent uniform choices; the announcement draws one uniform
    choice directly).
    """
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}")
    tables = facilitated_round_tables(lam)
    branches = tables["branches"]
    dist: dict[tuple, float] = {}
    # Basis weight given acceptance: sift keeps (q, q) out of 4 equally
    # likely pairs; announcement draws q directly. Both give 1/2 per basis,
    # derived here from each policy's own enumeration.
    if policy == POLICY_SIFT_DISCARD:
        pairs = [(qa, qb) for qa in ("X", "Z") for qb in ("X", "Z")]
        kept = [(qa, qb) for qa, qb in pairs if qa == qb]
        basis_weight = {q: sum(1.0 for qa, qb in kept if qa == q) / len(kept) for q, _ in kept}
    else:
        basis_weight = {"X": 0.5, "Z": 0.5}
    for label, p_branch, collapsed in branches:
        if collapsed is None:
            continue
        mode = MODE_MESSAGE if label == "b0" else MODE_CONTROL
        for q, wq in basis_weight.items():
            basis = basis_by_name(q)
            for (a, b), pr in joint_distribution(collapsed, [basis, basis]):
                key = (mode, q, int(a), int(b))
                dist[key] = dist.get(key, 0.0) + p_branch * wq * pr
    return dist


# ---------------------------------------------------------------------------
# Session generation
# ---------------------------------------------------------------------------


def facilitated_plan(
    m: int,
    lambda_angle: float = math.pi / 2,
    policy: str = POLICY_SIFT_DISCARD,
    cheat: CheatModel | None = None,
    seed: int = 0,
) -> dict[str, np.ndarray]:
    """Deterministic columnar plan of a facilitated session.

    This is the single source of truth for both the in-process simulator
    and the wire-transport roles: every column is a pure function of the
    arguments. Outcome columns hold post-cheat recorded values; sampled
    (pre-cheat) values are kept alongside for harness cross-checks.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if not math.isfinite(lambda_angle):
        raise ValueError("lambda angle must be finite")
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}")
    cheat = cheat if cheat is not None else honest()

    tables = facilitated_round_tables(lambda_angle)
    u_quantum = _rng.substream(seed, _rng.QUANTUM).random((m, 2))
    branch_b1 = (u_quantum[:, 0] >= tables["p_b0"]).astype(np.int8)  # 0 = b0/message

    basis_names = np.array(["X", "Z"])
    if policy == POLICY_SIFT_DISCARD:
        qa = (_rng.substream(seed, _rng.ALICE_BASIS).random(m) >= 0.5).astype(np.int8)
        qb = (_rng.substream(seed, _rng.BOB_BASIS).random(m) >= 0.5).astype(np.int8)
        accepted = qa == qb
    else:
        qc = (_rng.substream(seed, _rng.CHARLIE_BASIS).random(m) >= 0.5).astype(np.int8)
        qa = qb = qc
        accepted = np.ones(m, dtype=bool)

    # Joint outcomes on accepted rounds (both parties share basis index qa).
    rows = tables["cums"][branch_b1, qa]
    cells = (u_quantum[:, 1, None] >= rows).sum(axis=1).clip(max=3)
    a_sampled = np.where(accepted, tables["a_signs"][cells], 0).astype(np.int8)
    b_sampled = np.where(accepted, tables["b_signs"][cells], 0).astype(np.int8)

    a_recorded, b_recorded = a_sampled.copy(), b_sampled.copy()
    control = branch_b1 == 1
    if cheat.kind == "random":
        noise = np.where(_rng.substream(seed, _rng.ALICE_CHEAT if cheat.party == "alice" else _rng.BOB_CHEAT).random(m) < 0.5, 1, -1).astype(np.int8)
        mask = accepted & control
        if cheat.party == "alice":
            a_recorded = np.where(mask, noise, a_recorded)
        else:
            b_recorded = np.where(mask, noise, b_recorded)
    elif cheat.kind == "flip":
        if cheat.party == "alice":
            a_recorded = (-a_recorded).astype(np.int8)
        else:
            b_recorded = (-b_recorded).astype(np.int8)

    return {
        "round_id": np.arange(m, dtype=np.int64),
        "branch_b1": branch_b1,
        "mode": np.where(control, MODE_CONTROL, MODE_MESSAGE).astype("<U10"),
        "charlie_outcome": np.where(control, "b1", "b0").astype("<U2"),
        "alice_basis": basis_names[qa],
        "bob_basis": basis_names[qb],
        "accepted": accepted,
        "alice_sampled": a_sampled,
        "bob_sampled": b_sampled,
        "alice_outcome": a_recorded,
        "bob_outcome": b_recorded,
    }


def facilitated_session(
    m: int,
    lambda_angle: float = math.pi / 2,
    policy: str = POLICY_SIFT_DISCARD,
    cheat: CheatModel | None = None,
    seed: int = 0,
) -> SessionTranscript:
    """Simulate a facilitated secret-sharing session in process."""
    cheat = cheat if cheat is not None else honest()
    plan = facilitated_plan(m, lambda_angle, policy, cheat, seed)
    cols = {k: v for k, v in plan.items() if k not in ("alice_sampled", "bob_sampled", "branch_b1")}
    params = {
        "m": m,
        "lambda": float(lambda_angle),
        "policy": policy,
        "cheat": cheat.label(),
        "seed": int(seed),
    }
    return SessionTranscript(PROTOCOL_FACILITATED, params, cols)


def qss_plan(m: int, seed: int = 0) -> dict[str, np.ndarray]:
    """Deterministic columnar plan of an entanglement-based sharing session."""
    if m < 1:
        raise ValueError("m must be >= 1")
    ghz = standard_ghz()
    # Cumulative 8-cell tables for each of the 8 X/Y basis triples.
    cums = np.zeros((8, 8))
    for t in range(8):
        names = ["X" if not (t >> (2 - i)) & 1 else "Y" for i in range(3)]
        dist = joint_distribution(ghz, [basis_by_name(nm) for nm in names])
        cums[t] = np.cumsum([p for _, p in dist])
    signs = np.array([1, -1], dtype=np.int8)

    u = _rng.substream(seed, _rng.QUANTUM).random(m)
    ba = (_rng.substream(seed, _rng.ALICE_BASIS).random(m) >= 0.5).astype(np.int8)
    bb = (_rng.substream(seed, _rng.BOB_BASIS).random(m) >= 0.5).astype(np.int8)
    bc = (_rng.substream(seed, _rng.CHARLIE_BASIS).random(m) >= 0.5).astype(np.int8)
    triple = (ba << 2) | (bb << 1) | bc
    cells = (u[:, None] >= cums[triple]).sum(axis=1).clip(max=7)

    basis_names = np.array(["X", "Y"])
    accepted_mask = np.zeros(8, dtype=bool)
    for names in QSS_ACCEPTED_TRIPLES:
        t = (int(names[0] == "Y") << 2) | (int(names[1] == "Y") << 1) | int(names[2] == "Y")
        accepted_mask[t] = True
    return {
        "round_id": np.arange(m, dtype=np.int64),
        "alice_basis": basis_names[ba],
        "bob_basis": basis_names[bb],
        "charlie_basis": basis_names[bc],
        "accepted": accepted_mask[triple],
        "alice_outcome": signs[(cells >> 2) & 1],
        "bob_outcome": signs[(cells >> 1) & 1],
        "charlie_sign": signs[cells & 1],
    }


def qss_session(m: int, seed: int = 0) -> SessionTranscript:
    """Simulate the entanglement-based sharing protocol in process."""
    cols = qss_plan(m, seed)
    return SessionTranscript(PROTOCOL_QSS, {"m": m, "seed": int(seed)}, cols)


# ---------------------------------------------------------------------------
# Analysis
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KeyBits:
    """Sifted message-mode key material for both parties.

    ``agreement_rate`` is None when no accepted message rounds exist.
    """

    alice_key: str
    bob_key: str
    agreement_rate: float | None

    @property
    def defined(self) -> bool:
        return self.agreement_rate is not None


def extract_key(transcript: SessionTranscript) -> KeyBits:
    """Map accepted message rounds to bits: +1 outcomes (|0>, |+>) are 0,
    -1 outcomes (|1>, |->) are 1; the second party flips on Z-basis rounds."""
    if transcript.protocol != PROTOCOL_FACILITATED:
        raise ValueError("key extraction applies to facilitated transcripts")
    cols = transcript.columns
    mask = cols["accepted"] & (cols["mode"] == MODE_MESSAGE)
    if not mask.any():
        return KeyBits("", "", None)
    a_bits = (cols["alice_outcome"][mask] < 0).astype(np.int8)
    b_bits = (cols["bob_outcome"][mask] < 0).astype(np.int8)
    flip = cols["bob_basis"][mask] == "Z"
    b_bits = np.where(flip, 1 - b_bits, b_bits)
    agreement = float((a_bits == b_bits).mean())
    return KeyBits("".join(map(str, a_bits)), "".join(map(str, b_bits)), agreement)


@dataclass(frozen=True)
class DetectionReport:
    """Control-round compliance statistics and the resulting verdict.

    Verdict is Honest iff compliance_rate >= threshold - slack;
    Indeterminate when no accepted control rounds exist.
    """

    control_rounds: int
    compliant_rounds: int
    compliance_rate: float | None
    threshold: float
    slack: float
    verdict: str


def detect_cheating(transcript: SessionTranscript, threshold: float = 0.75, slack: float = 0.03) -> DetectionReport:
    """Check accepted control rounds against the branch-b1 parity rules.

    Z rounds comply when the outcome product is +1; X rounds when it is -1.
    The slack absorbs finite-sample noise around the 75% expectation and is
    reported alongside the verdict.
    """
    if transcript.protocol != PROTOCOL_FACILITATED:
        raise ValueError("cheat detection applies to facilitated transcripts")
    cols = transcript.columns
    mask = cols["accepted"] & (cols["mode"] == MODE_CONTROL)
    n = int(mask.sum())
    if n == 0:
        return DetectionReport(0, 0, None, threshold, slack, "Indeterminate")
    product = (cols["alice_outcome"][mask] * cols["bob_outcome"][mask]).astype(int)
    is_z = cols["alice_basis"][mask] == "Z"
    target = np.where(is_z, RULE_B1["Z"], RULE_B1["X"])
    compliant = int((product == target).sum())
    rate = compliant / n
    verdict = "Honest" if rate >= threshold - slack else "CheatingSuspected"
    return DetectionReport(n, compliant, rate, threshold, slack, verdict)
