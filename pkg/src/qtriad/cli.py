"""Command-line front end: figure sweeps as CSV (optionally rendered to
image files), single game reports with cross-checks, protocol sessions over
in-process or socket transport, and a verify-all report.

Exit codes: 0 all checks pass, 1 a cross-check failed, 2 usage error,
3 transport failure. Output files land in --out / $QTRIAD_OUTDIR and are
byte-stable for equal flags and seeds.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import re
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import games, protocols, transport
from .errors import TransportError
from .qcore import StateVector
from .states import ghz_class, standard_ghz, standard_w, w_class, w_n

EXIT_OK = 0
EXIT_CHECK = 1
EXIT_USAGE = 2
EXIT_TRANSPORT = 3

_SWEEP_FAMILIES = ("ghz", "w", "wn", "rulemaker-w", "rulemaker-ghz")


# ---------------------------------------------------------------------------
# Flag parsing helpers
# ---------------------------------------------------------------------------


def parse_angle(text: str) -> float:
    """Angles in radians; accepts 'pi/4'-style expressions and a 'deg' suffix."""
    t = text.strip().lower().replace(" ", "")
    if t.endswith("deg"):
        return math.radians(float(t[:-3]))
    m = re.fullmatch(r"(-?)(\d*\.?\d*)\*?pi(?:/(-?\d+\.?\d*))?", t)
    if m:
        sign = -1.0 if m.group(1) else 1.0
        coef = float(m.group(2)) if m.group(2) else 1.0
        div = float(m.group(3)) if m.group(3) else 1.0
        return sign * coef * math.pi / div
    try:
        return float(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse angle {text!r}") from None


def parse_linear_grid(text: str) -> np.ndarray:
    """'start:stop:count' -> inclusive linspace; bounds accept angle syntax."""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"grid {text!r} must be start:stop:count")
    start, stop = parse_angle(parts[0]), parse_angle(parts[1])
    try:
        count = int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid count {parts[2]!r} must be an integer") from None
    if count < 1:
        raise argparse.ArgumentTypeError("grid count must be >= 1")
    return np.linspace(start, stop, count)


def parse_int_range(text: str) -> range:
    """'1..50' -> inclusive integer range."""
    m = re.fullmatch(r"(\d+)\.\.(\d+)", text.strip())
    if not m:
        raise argparse.ArgumentTypeError(f"range {text!r} must be like 1..50")
    lo, hi = int(m.group(1)), int(m.group(2))
    if hi < lo:
        raise argparse.ArgumentTypeError("range upper bound below lower bound")
    return range(lo, hi + 1)


def _fmt(value: float | None) -> str:
    if value is None:
        return ""
    return f"{value:.12g}"


def _outdir() -> Path:
    return Path(os.environ.get("QTRIAD_OUTDIR", "."))


def _resolve_out(path_arg: str | None, default_name: str) -> Path:
    if path_arg:
        return Path(path_arg)
    out = _outdir()
    out.mkdir(parents=True, exist_ok=True)
    return out / default_name


class _Checks:
    """Collects PASS/FAIL lines; drives the exit code."""

    def __init__(self) -> None:
        self.failed = 0

    def check(self, name: str, ok: bool, detail: str = "") -> bool:
        status = "PASS" if ok else "FAIL"
        suffix = f"  ({detail})" if detail else ""
        print(f"[{status}] {name}{suffix}")
        if not ok:
            self.failed += 1
        return ok

    def exit_code(self) -> int:
        return EXIT_OK if self.failed == 0 else EXIT_CHECK


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


def _sweep_table(family: str, args) -> tuple[list[games.SweepRow], list[float | None], float, str | None]:
    """Rows, closed-form column, classical baseline, and optional note."""
    note = None
    if family == "ghz":
        grid = parse_linear_grid(args.theta)
        rows = games.sweep("ghz_theta", grid)
        closed = [games.ghz_xy_win_closed(r.parameter) for r in rows]
        baseline = 0.75
    elif family == "w":
        points = games.random_simplex_points(args.points, args.seed)
        rows = games.sweep("w_simplex", points)
        closed = [games.w_zy_win_closed(*p) for p in points]
        baseline = 0.75
    elif family == "wn":
        ns = parse_int_range(args.n)
        rows = games.sweep("w_n", ns)
        closed = [games.w_n_zy_win_closed(n) for n in ns]
        baseline = 0.75
    elif family == "rulemaker-w":
        grid = parse_linear_grid(args.lam)
        rows = games.sweep("rule_maker_lambda", grid)
        closed = [games.w_rule_maker_win_closed(lam) for lam in grid]
        baseline = 0.5
    elif family == "rulemaker-ghz":
        grid = parse_linear_grid(args.lam)
        rows = games.sweep("rule_maker_lambda", grid, state=standard_ghz())
        closed = [games.ghz_rule_maker_curve(lam) for lam in grid]
        baseline = 0.5
        note = games.RULE_MAKER_GHZ_NOTE
    else:  # pragma: no cover - argparse restricts choices
        raise ValueError(family)
    return rows, closed, baseline, note


def _write_sweep_csv(path: Path, rows, closed, baseline) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["parameter", "x_measure", "win_exact", "win_closed_form", "classical_baseline"])
        for row, cf in zip(rows, closed):
            writer.writerow([_fmt(row.parameter), _fmt(row.x_measure), _fmt(row.win), _fmt(cf), _fmt(baseline)])


def cmd_sweep(args) -> int:
    checks = _Checks()
    rows, closed, baseline, note = _sweep_table(args.family, args)
    out = _resolve_out(args.out, f"sweep_{args.family}.csv")
    _write_sweep_csv(out, rows, closed, baseline)
    print(f"wrote {len(rows)} rows to {out}")
    if note:
        print(f"NOTE: {note}")
    max_dev = max(abs(r.win - cf) for r, cf in zip(rows, closed))
    checks.check(
        f"sweep {args.family}: enumerator matches closed form",
        max_dev <= 1e-12,
        f"max |exact - closed| = {max_dev:.3e}",
    )
    bounds_ok = all(0.0 <= r.win <= 1.0 + 1e-12 for r in rows)
    checks.check(f"sweep {args.family}: win probabilities within [0, 1]", bounds_ok)
    if args.plot:
        from .plotting import render_sweep_figure

        fig_path = Path(args.plot) if args.plot != "auto" else out.with_suffix(".png")
        render_sweep_figure(rows, args.family, str(fig_path), baseline=baseline, note=note)
        print(f"rendered figure to {fig_path}")
    return checks.exit_code()


# ---------------------------------------------------------------------------
# game
# ---------------------------------------------------------------------------


def _resolve_state(args) -> tuple[StateVector, tuple[float, float, float] | None, float | None]:
    """State plus (a, b, c) when on the real simplex, plus theta when GHZ-class."""
    name = args.state
    if name in ("ghz", "ghz-std"):
        theta = parse_angle(args.theta) if args.theta is not None else math.pi / 4
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return ghz_class(theta), None, theta
    if name == "w-std":
        s = 1.0 / math.sqrt(3.0)
        return standard_w(), (s, s, s), None
    if name == "w":
        if None in (args.a, args.b, args.c):
            raise argparse.ArgumentTypeError("--state w requires --a --b --c")
        triple = (args.a, args.b, args.c)
        simplex = triple if all(v >= 0 for v in triple) else None
        return w_class(*triple), simplex, None
    if name == "wn":
        if args.n_value is None:
            raise argparse.ArgumentTypeError("--state wn requires --n")
        gamma = parse_angle(args.gamma) if args.gamma else 0.0
        delta = parse_angle(args.delta) if args.delta else 0.0
        state = w_n(args.n_value, gamma, delta)
        if gamma == 0.0 and delta == 0.0:
            from .states import w_n_amplitudes

            a, b, c = w_n_amplitudes(args.n_value)
            return state, (a.real, b.real, c.real), None
        return state, None, None
    raise argparse.ArgumentTypeError(f"unknown state {name!r}")


def cmd_game(args) -> int:
    checks = _Checks()
    state, simplex, theta = _resolve_state(args)

    if args.rulemaker:
        lam = parse_angle(args.lam) if args.lam else math.pi / 2
        spec = games.RuleMakerSpec(lam)
        exact = games.rule_maker_win(state, spec)
        print(f"rule-maker game, lambda = {lam:.6g} rad")
        print(f"  exact win        : {exact:.12g}")
        if args.state == "w-std":
            cf = games.w_rule_maker_win_closed(lam)
            print(f"  closed form      : {cf:.12g}")
            checks.check("closed form matches enumerator", abs(cf - exact) <= 1e-12)
        elif args.state in ("ghz", "ghz-std") and theta == math.pi / 4:
            cf = games.ghz_rule_maker_curve(lam)
            print(f"  enumerated curve : {cf:.12g}")
            print(f"  NOTE: {games.RULE_MAKER_GHZ_NOTE}")
            checks.check("curve matches enumerator", abs(cf - exact) <= 1e-12)
        print(f"  classical (random answers): 0.5")
        if args.trials:
            est, err = games.rule_maker_monte_carlo(state, spec, args.trials, args.seed)
            dev = abs(est - exact)
            print(f"  monte carlo      : {est:.6f} +- {err:.6f} ({args.trials} trials, seed {args.seed})")
            checks.check("Monte Carlo within 4 sigma of exact", dev <= 4 * err or (err == 0 and dev == 0))
        return checks.exit_code()

    spec = games.xy_game_spec() if args.xy else games.zy_game_spec()
    game_name = "XY" if args.xy else "ZY"
    exact = games.exact_quantum_win(state, spec)
    best, _ = games.classical_best(spec)
    print(f"{game_name} game")
    print(f"  exact win        : {exact:.12g}")

    closed: float | None = None
    if args.xy and theta is not None:
        closed = games.ghz_xy_win_closed(theta)
    elif not args.xy and simplex is not None:
        closed = games.w_zy_win_closed(*simplex)
    if closed is None:
        print("  closed form      : n/a (outside the documented validity slice)")
    else:
        print(f"  closed form      : {closed:.12g}")
        checks.check("closed form matches enumerator", abs(closed - exact) <= 1e-12,
                     f"|diff| = {abs(closed - exact):.3e}")

    print(f"  classical best   : {best} = {float(best):.6g}")
    checks.check("win probability within [0, 1]", 0.0 <= exact <= 1.0 + 1e-12)
    if args.trials:
        est, err = games.monte_carlo_win(state, spec, args.trials, args.seed)
        dev = abs(est - exact)
        print(f"  monte carlo      : {est:.6f} +- {err:.6f} ({args.trials} trials, seed {args.seed})")
        checks.check("Monte Carlo within 4 sigma of exact", dev <= 4 * err or (err == 0.0 and dev == 0.0),
                     f"|dev| = {dev:.3e}, sigma = {err:.3e}")
    return checks.exit_code()


# ---------------------------------------------------------------------------
# protocol sessions
# ---------------------------------------------------------------------------


def _parse_hostport(text: str) -> tuple[str, int]:
    host, sep, port = text.rpartition(":")
    if not sep:
        raise argparse.ArgumentTypeError(f"{text!r} is not host:port")
    return host, int(port)


def _run_session(protocol: str, params: dict, args) -> protocols.SessionTranscript | None:
    """Run locally, via run_roles, or as one process of a socket trio."""
    if args.role in ("alice", "bob"):
        host, port = _parse_hostport(args.connect)
        transport.connect_spoke(args.role, host, port, timeout=args.timeout)
        return None
    if args.role == "charlie":
        host, port = _parse_hostport(args.listen)
        return transport.serve_charlie(protocol, params, host, port, timeout=args.timeout)
    if args.transport == "none":
        if protocol == protocols.PROTOCOL_FACILITATED:
            return protocols.facilitated_session(
                params["m"], params["lambda"], params["policy"],
                protocols.parse_cheat(params["cheat"]), params["seed"],
            )
        return protocols.qss_session(params["m"], params["seed"])
    return transport.run_roles(protocol, params, transport=args.transport, timeout=args.timeout)


def cmd_qss(args) -> int:
    checks = _Checks()
    params = {"m": args.m, "seed": args.seed}
    transcript = _run_session(protocols.PROTOCOL_QSS, params, args)
    if transcript is None:
        print("spoke finished")
        return EXIT_OK
    out = _resolve_out(args.out, f"qss_m{args.m}_s{args.seed}.jsonl")
    transcript.write_jsonl(out)
    cols = transcript.columns
    accepted = cols["accepted"]
    frac = float(accepted.mean())
    print(f"rounds           : {transcript.num_rounds}")
    print(f"accepted fraction: {frac:.4f} (expected 0.5)")
    matches = 0
    total = 0
    for i in np.flatnonzero(accepted):
        inferred = protocols.qss_alice_inference(
            (str(cols["bob_basis"][i]), int(cols["bob_outcome"][i])),
            (str(cols["charlie_basis"][i]), int(cols["charlie_sign"][i])),
        )
        total += 1
        if inferred == (str(cols["alice_basis"][i]), int(cols["alice_outcome"][i])):
            matches += 1
    print(f"inference matches: {matches}/{total}")
    print(f"transcript       : {out}")
    checks.check("every accepted round matches the inference table", matches == total)
    sigma = math.sqrt(0.25 / transcript.num_rounds)
    checks.check("acceptance fraction within 3 sigma of 1/2", abs(frac - 0.5) <= 3 * sigma,
                 f"|dev| = {abs(frac - 0.5):.4f}, 3 sigma = {3 * sigma:.4f}")
    return checks.exit_code()


def cmd_facilitated(args) -> int:
    checks = _Checks()
    lam = parse_angle(args.lam)
    cheat = protocols.parse_cheat(args.cheat)
    params = {"m": args.m, "lambda": lam, "policy": args.policy, "cheat": cheat.label(), "seed": args.seed}
    transcript = _run_session(protocols.PROTOCOL_FACILITATED, params, args)
    if transcript is None:
        print("spoke finished")
        return EXIT_OK
    out = _resolve_out(args.out, f"facilitated_m{args.m}_s{args.seed}.jsonl")
    transcript.write_jsonl(out)
    report = protocols.detect_cheating(transcript)
    key = protocols.extract_key(transcript)
    print(f"rounds            : {transcript.num_rounds} (complete: {transcript.complete})")
    print(f"control rounds    : {report.control_rounds}")
    rate = "n/a" if report.compliance_rate is None else f"{report.compliance_rate:.4f}"
    print(f"compliance rate   : {rate} (threshold {report.threshold} - slack {report.slack})")
    print(f"verdict           : {report.verdict}")
    agreement = "n/a" if key.agreement_rate is None else f"{key.agreement_rate:.4f}"
    print(f"key bits          : {len(key.alice_key)}, agreement {agreement}")
    print(f"transcript        : {out}")
    reparsed = protocols.transcript_from_jsonl(transcript.to_jsonl().splitlines())
    checks.check("transcript serialization round-trips", reparsed.to_jsonl() == transcript.to_jsonl())
    return checks.exit_code()


# ---------------------------------------------------------------------------
# verify-all
# ---------------------------------------------------------------------------


def cmd_verify_all(args) -> int:
    checks = _Checks()
    outdir = Path(args.outdir) if args.outdir else _outdir()
    outdir.mkdir(parents=True, exist_ok=True)

    # Figure sweeps (CSV + optional figures), each with its closed form.
    class _NS:
        pass

    sweep_flags = {
        "ghz": {"theta": "0:pi/4:100"},
        "w": {"points": 100, "seed": 11},
        "wn": {"n": "1..50"},
        "rulemaker-w": {"lam": "0:pi/2:91"},
        "rulemaker-ghz": {"lam": "0:pi/2:91"},
    }
    for family, flags in sweep_flags.items():
        ns = _NS()
        for k, v in flags.items():
            setattr(ns, k, v)
        rows, closed, baseline, note = _sweep_table(family, ns)
        _write_sweep_csv(outdir / f"sweep_{family}.csv", rows, closed, baseline)
        if args.plot:
            from .plotting import render_sweep_figure

            render_sweep_figure(rows, family, str(outdir / f"sweep_{family}.png"), baseline=baseline, note=note)
        max_dev = max(abs(r.win - cf) for r, cf in zip(rows, closed))
        checks.check(f"{family} sweep matches closed form", max_dev <= 1e-12, f"max dev {max_dev:.2e}")
        if note:
            print(f"NOTE: {note}")

    checks.check(
        "standard GHZ wins the XY game with certainty",
        abs(games.exact_quantum_win(standard_ghz(), games.xy_game_spec()) - 1.0) <= 1e-12,
    )
    checks.check(
        "standard W wins the ZY game at 0.875",
        abs(games.exact_quantum_win(standard_w(), games.zy_game_spec()) - 0.875) <= 1e-12,
    )
    for name, spec in (("XY", games.xy_game_spec()), ("ZY", games.zy_game_spec())):
        best, _ = games.classical_best(spec)
        checks.check(f"classical optimum of the {name} game is exactly 3/4", best == Fraction(3, 4))

    est, err = games.monte_carlo_win(standard_w(), games.zy_game_spec(), args.trials, seed=5)
    checks.check(
        "Monte Carlo agrees with the enumerator (ZY, standard W)",
        abs(est - 0.875) <= 4 * err,
        f"est {est:.5f}, sigma {err:.5f}",
    )

    qss = protocols.qss_session(20000, seed=3)
    frac = float(qss.columns["accepted"].mean())
    checks.check("sifting keeps half the rounds", abs(frac - 0.5) <= 3 * math.sqrt(0.25 / 20000), f"{frac:.4f}")

    honest_run = protocols.facilitated_session(5000, seed=4, policy=protocols.POLICY_CHARLIE_ANNOUNCES)
    key = protocols.extract_key(honest_run)
    report = protocols.detect_cheating(honest_run)
    checks.check("honest facilitated session: key agreement 1.0", key.agreement_rate == 1.0)
    checks.check("honest facilitated session: verdict Honest", report.verdict == "Honest",
                 f"compliance {report.compliance_rate:.4f}")
    cheat_run = protocols.facilitated_session(
        5000, seed=4, policy=protocols.POLICY_CHARLIE_ANNOUNCES, cheat=protocols.random_announcer("bob")
    )
    cheat_report = protocols.detect_cheating(cheat_run)
    checks.check("random-announcing Bob is flagged", cheat_report.verdict == "CheatingSuspected",
                 f"compliance {cheat_report.compliance_rate:.4f}")

    params = {"m": 50, "seed": 6, "lambda": math.pi / 2, "policy": protocols.POLICY_SIFT_DISCARD, "cheat": "honest"}
    t_local = transport.run_roles(protocols.PROTOCOL_FACILITATED, params, transport="in-process")
    t_socket = transport.run_roles(protocols.PROTOCOL_FACILITATED, params, transport="socket")
    checks.check("in-process and socket transcripts are byte-identical",
                 t_local.to_jsonl() == t_socket.to_jsonl())

    print(f"\noutput directory: {outdir}")
    return checks.exit_code()


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qtriad",
        description="Three-qubit entanglement games and facilitated secret sharing.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="reproduce a figure family as CSV (optionally rendered)")
    p_sweep.add_argument("family", choices=_SWEEP_FAMILIES)
    p_sweep.add_argument("--theta", default="0:pi/4:100", help="GHZ grid start:stop:count")
    p_sweep.add_argument("--points", type=int, default=200, help="simplex sample count (family w)")
    p_sweep.add_argument("--seed", type=int, default=1, help="simplex sampling seed (family w)")
    p_sweep.add_argument("--n", default="1..50", help="integer range for the wn family")
    p_sweep.add_argument("--lambda", dest="lam", default="0:pi/2:91", help="rule-maker grid start:stop:count")
    p_sweep.add_argument("--out", help="CSV path (default $QTRIAD_OUTDIR/sweep_<family>.csv)")
    p_sweep.add_argument("--plot", nargs="?", const="auto", default=None,
                         help="render a figure (optional path; default CSV path with .png)")
    p_sweep.set_defaults(func=cmd_sweep)

    p_game = sub.add_parser("game", help="evaluate one game on one state with cross-checks")
    p_game.add_argument("--state", required=True, choices=("ghz", "ghz-std", "w", "w-std", "wn"))
    p_game.add_argument("--theta", help="GHZ-class angle (default pi/4)")
    p_game.add_argument("--a", type=float)
    p_game.add_argument("--b", type=float)
    p_game.add_argument("--c", type=float)
    p_game.add_argument("--n", dest="n_value", type=int, help="index of the wn family")
    p_game.add_argument("--gamma", help="wn relative phase")
    p_game.add_argument("--delta", help="wn relative phase")
    which = p_game.add_mutually_exclusive_group(required=True)
    which.add_argument("--xy", action="store_true")
    which.add_argument("--zy", action="store_true")
    which.add_argument("--rulemaker", action="store_true")
    p_game.add_argument("--lambda", dest="lam", help="rule-maker basis angle (default pi/2)")
    p_game.add_argument("--trials", type=lambda s: int(float(s)), default=0, help="Monte Carlo trials (0 = skip)")
    p_game.add_argument("--seed", type=int, default=0)
    p_game.set_defaults(func=cmd_game)

    def add_transport_flags(p) -> None:
        p.add_argument("--transport", choices=("none", "in-process", "socket"), default="none")
        p.add_argument("--role", choices=("charlie", "alice", "bob"),
                       help="run a single role of a multi-process socket session")
        p.add_argument("--listen", help="host:port for --role charlie")
        p.add_argument("--connect", help="host:port for --role alice/bob")
        p.add_argument("--timeout", type=float, default=transport.DEFAULT_TIMEOUT)
        p.add_argument("--out", help="transcript path (default $QTRIAD_OUTDIR/<auto>.jsonl)")

    p_qss = sub.add_parser("qss", help="run the entanglement-based sharing protocol")
    p_qss.add_argument("--m", type=lambda s: int(float(s)), required=True)
    p_qss.add_argument("--seed", type=int, default=0)
    add_transport_flags(p_qss)
    p_qss.set_defaults(func=cmd_qss)

    p_fac = sub.add_parser("facilitated", help="run the facilitated secret-sharing protocol")
    p_fac.add_argument("--m", type=lambda s: int(float(s)), required=True)
    p_fac.add_argument("--lambda", dest="lam", default="90deg", help="facilitator basis angle")
    p_fac.add_argument("--policy", choices=protocols.POLICIES, default=protocols.POLICY_SIFT_DISCARD)
    p_fac.add_argument("--cheat", default="honest", help="honest | random:<party> | flip:<party>")
    p_fac.add_argument("--seed", type=int, default=0)
    add_transport_flags(p_fac)
    p_fac.set_defaults(func=cmd_facilitated)

    p_verify = sub.add_parser("verify-all", help="run every reproduction check")
    p_verify.add_argument("--outdir", help="where CSVs/figures go (default $QTRIAD_OUTDIR)")
    p_verify.add_argument("--no-plot", dest="plot", action="store_false",
                          help="skip figure rendering (CSVs only)")
    p_verify.add_argument("--trials", type=lambda s: int(float(s)), default=200000,
                          help="Monte Carlo trials for the cross-check")
    p_verify.set_defaults(func=cmd_verify_all, plot=True)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "role", None) in ("alice", "bob") and not args.connect:
        parser.error("--role alice/bob requires --connect host:port")
    if getattr(args, "role", None) == "charlie" and not args.listen:
        parser.error("--role charlie requires --listen host:port")
    try:
        return args.func(args)
    except TransportError as exc:
        print(f"transport error: {exc}", file=sys.stderr)
        return EXIT_TRANSPORT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
