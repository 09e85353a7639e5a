"""Game evaluation: enumerator vs closed forms vs independent oracles."""

import math
from fractions import Fraction

import numpy as np
import pytest

from conftest import oracle_joint_probability
from qtriad.games import (
    CLASSICAL_BOUND,
    GameSpec,
    RULE_B0,
    RULE_B1,
    RuleMakerSpec,
    classical_best,
    exact_quantum_win,
    ghz_rule_maker_curve,
    ghz_xy_win_closed,
    monte_carlo_win,
    per_question_wins,
    random_simplex_points,
    rule_maker_monte_carlo,
    rule_maker_win,
    sweep,
    w_n_zy_win_closed,
    w_rule_maker_win_closed,
    w_zy_win_closed,
    xy_game_spec,
    zy_game_spec,
)
from qtriad.qcore import StateVector, basis_by_name, lambda_basis
from qtriad.states import ghz_class, standard_ghz, standard_w, w_class, w_n


def oracle_rule_maker(state, lam, rules=(RULE_B0, RULE_B1), qprobs=None):
    """Independent enumeration: explicit Kronecker projectors over
    (branch, question, both-player outcomes)."""
    qprobs = qprobs or {"X": 0.5, "Z": 0.5}
    win = 0.0
    for bi, rule in enumerate(rules):
        for q, pq in qprobs.items():
            basis = basis_by_name(q)
            for sa in (0, 1):
                for sb in (0, 1):
                    p = oracle_joint_probability(state, [basis, basis, lambda_basis(lam)], [sa, sb, bi])
                    product = (1 - 2 * sa) * (1 - 2 * sb)
                    if product == rule[q]:
                        win += pq * p
    return win


class TestGameSpecs:
    def test_xy_targets(self):
        spec = xy_game_spec()
        assert spec.win_targets[("X", "X", "X")] == 1
        assert spec.win_targets[("X", "Y", "Y")] == -1
        assert spec.win_targets[("Y", "X", "Y")] == -1
        assert spec.win_targets[("Y", "Y", "X")] == -1
        assert spec.set_probabilities == (Fraction(1, 4),) * 4

    def test_zy_targets(self):
        spec = zy_game_spec()
        assert spec.win_targets[("Z", "Z", "Z")] == -1
        assert spec.win_targets[("Z", "Y", "Y")] == 1
        assert spec.win_targets[("Y", "Z", "Y")] == 1
        assert spec.win_targets[("Y", "Y", "Z")] == 1
        assert spec.set_probabilities == (Fraction(1, 4),) * 4

    def test_player_questions(self):
        assert xy_game_spec().player_questions == (("X", "Y"),) * 3
        assert zy_game_spec().player_questions == (("Y", "Z"),) * 3

    def test_invalid_probabilities_rejected(self):
        sets = (("X", "X", "X"),)
        with pytest.raises(ValueError):
            GameSpec(sets, (0.5,), {sets[0]: 1})
        with pytest.raises(ValueError):
            GameSpec(sets, (1.0,), {})


class TestExactQuantumWin:
    def test_standard_ghz_always_wins_xy(self):
        assert exact_quantum_win(standard_ghz(), xy_game_spec()) == pytest.approx(1.0, abs=1e-12)

    def test_ghz_theta_closed_form(self):
        game = xy_game_spec()
        for theta in np.linspace(0.01, math.pi / 4, 25):
            win = exact_quantum_win(ghz_class(theta), game)
            assert win == pytest.approx(ghz_xy_win_closed(theta), abs=1e-12)
        for theta in (math.pi / 12, math.pi / 8, math.pi / 6):
            assert exact_quantum_win(ghz_class(theta), game) == pytest.approx(
                0.5 * (1 + math.sin(2 * theta)), abs=1e-12
            )

    def test_standard_w_zy(self):
        assert exact_quantum_win(standard_w(), zy_game_spec()) == pytest.approx(0.875, abs=1e-12)

    def test_w_per_question_wins(self):
        wins = per_question_wins(standard_w(), zy_game_spec())
        assert wins[("Z", "Z", "Z")] == pytest.approx(1.0, abs=1e-12)
        for qset in (("Z", "Y", "Y"), ("Y", "Z", "Y"), ("Y", "Y", "Z")):
            assert wins[qset] == pytest.approx(5 / 6, abs=1e-12)

    def test_w_simplex_closed_form(self):
        game = zy_game_spec()
        for a, b, c in random_simplex_points(100, seed=23):
            win = exact_quantum_win(w_class(a, b, c), game)
            assert win == pytest.approx(w_zy_win_closed(a, b, c), abs=1e-12)

    def test_w_n_closed_form_1_to_50(self):
        game = zy_game_spec()
        for n in range(1, 51):
            win = exact_quantum_win(w_n(n), game)
            assert win == pytest.approx(w_n_zy_win_closed(n), abs=1e-12)

    def test_w_n1_printed_value(self):
        # (11 + 2 sqrt 2)/16, usually quoted rounded to 0.86425.
        win = exact_quantum_win(w_n(1), zy_game_spec())
        assert win == pytest.approx((11 + 2 * math.sqrt(2)) / 16, abs=1e-12)
        assert win == pytest.approx(0.86425, abs=1e-4)

    def test_w_n_beats_classical_up_to_100(self):
        game = zy_game_spec()
        for n in range(1, 101):
            assert exact_quantum_win(w_n(n), game) > CLASSICAL_BOUND

    def test_product_state_zy(self):
        assert exact_quantum_win(w_class(1.0, 0.0, 0.0), zy_game_spec()) == pytest.approx(0.625, abs=1e-12)


class TestClassicalBest:
    def test_xy_is_three_quarters_exactly(self):
        value, _ = classical_best(xy_game_spec())
        assert value == Fraction(3, 4)

    def test_zy_is_three_quarters_exactly(self):
        value, _ = classical_best(zy_game_spec())
        assert value == Fraction(3, 4)

    def test_parity_obstruction_bound(self):
        # The four target products multiply to -1 while any deterministic
        # strategy's four answer-products multiply to +1, so at most 3 of 4
        # sets can be satisfied: 3/4 is an upper bound, and classical_best
        # must reach it.
        for spec in (xy_game_spec(), zy_game_spec()):
            target_product = math.prod(spec.win_targets[s] for s in spec.allowed_sets)
            assert target_product == -1
            value, strategy = classical_best(spec)
            satisfied = sum(
                1
                for qset in spec.allowed_sets
                if math.prod(strategy.answer(i, q) for i, q in enumerate(qset)) == spec.win_targets[qset]
            )
            assert satisfied == 3

    def test_degenerate_single_set(self):
        sets = (("X", "X", "X"),)
        spec = GameSpec(sets, (Fraction(1),), {sets[0]: 1})
        value, strategy = classical_best(spec)
        assert value == Fraction(1)

    def test_lexicographic_tie_break_deterministic(self):
        a = classical_best(zy_game_spec())[1]
        b = classical_best(zy_game_spec())[1]
        assert a == b
        # first argmax under (-1 before +1) flat ordering
        others = []
        spec = zy_game_spec()
        import itertools

        for flat in itertools.product((-1, 1), repeat=6):
            answers = tuple((flat[2 * i], flat[2 * i + 1]) for i in range(3))
            strat = type(a)(spec.player_questions, answers)
            value = sum(
                Fraction(1, 4)
                for qset in spec.allowed_sets
                if math.prod(strat.answer(i, q) for i, q in enumerate(qset)) == spec.win_targets[qset]
            )
            if value == Fraction(3, 4):
                others.append(strat.encoding())
        assert a.encoding() == min(others)


class TestMonteCarlo:
    def test_deterministic_per_seed(self):
        state = standard_w()
        spec = zy_game_spec()
        a = monte_carlo_win(state, spec, 200_000, seed=42)
        b = monte_carlo_win(state, spec, 200_000, seed=42)
        assert a == b

    def test_independent_of_workers(self):
        state = w_n(3)
        spec = zy_game_spec()
        serial = monte_carlo_win(state, spec, 300_000, seed=9, workers=1)
        parallel = monte_carlo_win(state, spec, 300_000, seed=9, workers=4)
        assert serial == parallel

    def test_ghz_xy_every_trial_wins(self):
        est, err = monte_carlo_win(standard_ghz(), xy_game_spec(), 100_000, seed=1)
        assert est == 1.0
        assert err == 0.0

    def test_product_state_matches_enumerator(self):
        amps = np.zeros(8)
        amps[0] = 1.0
        state = StateVector(amps)
        exact = exact_quantum_win(state, xy_game_spec())
        est, err = monte_carlo_win(state, xy_game_spec(), 1_000_000, seed=3)
        assert abs(est - exact) <= 3 * err

    def test_w_zy_three_sigma(self):
        est, err = monte_carlo_win(standard_w(), zy_game_spec(), 1_000_000, seed=17)
        assert abs(est - 0.875) <= 3 * err

    def test_std_error_formula(self):
        est, err = monte_carlo_win(standard_w(), zy_game_spec(), 4096, seed=2)
        assert err == pytest.approx(math.sqrt(est * (1 - est) / 4096), abs=1e-15)

    def test_zero_trials_rejected(self):
        with pytest.raises(ValueError):
            monte_carlo_win(standard_w(), zy_game_spec(), 0, seed=0)


class TestRuleMaker:
    def test_w_computational_basis_endpoint(self):
        win = rule_maker_win(standard_w(), RuleMakerSpec(math.pi / 2))
        assert win == pytest.approx(11 / 12, abs=1e-12)

    def test_w_flipped_basis_endpoint(self):
        win = rule_maker_win(standard_w(), RuleMakerSpec(0.0))
        assert win == pytest.approx(1 / 12, abs=1e-12)

    def test_w_full_curve_matches_independent_oracle(self):
        for lam in np.linspace(0.0, math.pi / 2, 31):
            got = rule_maker_win(standard_w(), RuleMakerSpec(lam))
            assert got == pytest.approx(oracle_rule_maker(standard_w(), lam), abs=1e-12)
            assert got == pytest.approx(w_rule_maker_win_closed(lam), abs=1e-12)

    def test_ghz_endpoints_are_half(self):
        for lam in (0.0, math.pi / 2):
            assert rule_maker_win(standard_ghz(), RuleMakerSpec(lam)) == pytest.approx(0.5, abs=1e-12)

    def test_ghz_curve_is_lambda_dependent(self):
        # The flat-50% shortcut does not hold between the endpoints.
        mid = rule_maker_win(standard_ghz(), RuleMakerSpec(math.pi / 4))
        assert mid == pytest.approx(0.25, abs=1e-12)
        for lam in np.linspace(0.0, math.pi / 2, 31):
            got = rule_maker_win(standard_ghz(), RuleMakerSpec(lam))
            assert got == pytest.approx(ghz_rule_maker_curve(lam), abs=1e-12)
            assert got == pytest.approx(oracle_rule_maker(standard_ghz(), lam), abs=1e-12)

    def test_question_probability_override(self):
        spec = RuleMakerSpec(math.pi / 2, {"X": 0.25, "Z": 0.75})
        got = rule_maker_win(standard_w(), spec)
        assert got == pytest.approx(oracle_rule_maker(standard_w(), math.pi / 2, qprobs={"X": 0.25, "Z": 0.75}), abs=1e-12)

    def test_zero_probability_branch_skipped(self):
        amps = np.zeros(8)
        amps[6] = 1.0  # |110>: qubit C fixed at |0>
        state = StateVector(amps)
        win = rule_maker_win(state, RuleMakerSpec(0.0))  # b0 = -|1> never occurs
        assert win == pytest.approx(oracle_rule_maker(state, 0.0), abs=1e-12)

    def test_monte_carlo_cross_check(self):
        spec = RuleMakerSpec(0.9)
        exact = rule_maker_win(standard_w(), spec)
        est, err = rule_maker_monte_carlo(standard_w(), spec, 500_000, seed=4)
        assert abs(est - exact) <= 4 * err
        assert rule_maker_monte_carlo(standard_w(), spec, 500_000, seed=4, workers=3) == (est, err)

    def test_invalid_question_probabilities(self):
        with pytest.raises(ValueError):
            RuleMakerSpec(0.3, {"X": 0.6, "Z": 0.6})


class TestSweep:
    def test_ghz_rows_satisfy_tau_relation(self):
        rows = sweep("ghz_theta", np.linspace(0.01, math.pi / 4, 200))
        for row in rows:
            assert row.win == pytest.approx(0.5 * (1 + math.sqrt(row.x_measure)), abs=1e-9)
            assert (row.win > 0.75) == (row.x_measure > 0.25)

    def test_w_simplex_linear_in_concurrence_sum(self):
        points = random_simplex_points(150, seed=8)
        rows = sweep("w_simplex", points)
        for row in rows:
            assert row.win == pytest.approx(5 / 8 + row.x_measure / 8, abs=1e-9)
            assert (row.win > 0.75) == (row.x_measure > 1.0)

    def test_w_simplex_maximum_at_balanced_point(self):
        s = 1.0 / math.sqrt(3.0)
        points = random_simplex_points(200, seed=13) + [(s, s, s)]
        rows = sweep("w_simplex", points)
        best = max(rows, key=lambda r: r.win)
        assert best.parameter == len(points) - 1
        assert best.win == pytest.approx(0.875, abs=1e-12)

    def test_wn_rows(self):
        rows = sweep("w_n", range(1, 21))
        assert rows[0].parameter == 1.0
        assert rows[0].win == pytest.approx((11 + 2 * math.sqrt(2)) / 16, abs=1e-12)
        assert rows[0].x_measure == pytest.approx(0.5 + math.sqrt(2), abs=1e-9)
        assert all(r.win > 0.75 for r in rows)

    def test_rule_maker_default_state(self):
        rows = sweep("rule_maker_lambda", [0.0, math.pi / 2])
        assert rows[0].win == pytest.approx(1 / 12, abs=1e-12)
        assert rows[1].win == pytest.approx(11 / 12, abs=1e-12)

    def test_rule_maker_explicit_state(self):
        rows = sweep("rule_maker_lambda", [0.0, math.pi / 2], state=standard_ghz())
        assert all(r.win == pytest.approx(0.5, abs=1e-12) for r in rows)

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            sweep("nope", [1.0])

    def test_empty_grid(self):
        with pytest.raises(ValueError):
            sweep("ghz_theta", [])
