"""Command-line entry point.

    absim run CONFIG [--seed U64] [--trials N] [--out PATH] [--csv PATH] [--workers K]
    absim scaling --g0 F --n 16,64,256 [--trials N] [--seed U64] [--out PATH]
    absim check

Exit codes: 0 success, 1 failed identity check, 2 invalid config or parse
error, 3 no trial passed postselection.
"""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace

import numpy as np

from .errors import ConfigInvalid, ParseError, ZeroPostselection
from .hilbert import SIGMA_X, SIGMA_Y, SIGMA_Z, IDENTITY2, matrix_exponential
from .interferometer import build_double_mzi, build_double_well, build_single_mzi, transfer
from .modular import (
    CyclicLattice,
    LatticePotential,
    heisenberg_evolved,
    kicked_qubit_evolution,
    modular_commutator_check,
)
from .runner import LATTICE_BOUND, dump_json, load_config, run_scenario, survival_scaling, trial_rng

EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_ZERO_POSTSELECTION = 3


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.trials is not None:
        overrides["trials"] = args.trials
    cfg = replace(cfg, **overrides).validate()
    report = run_scenario(cfg, workers=args.workers)
    text = report.to_json()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.csv:
        if report.readings is None:
            raise ConfigInvalid("csv", f"scenario {cfg.scenario} has no per-trial readings")
        report.write_csv(args.csv)
    return 0


def _cmd_scaling(args) -> int:
    try:
        ns = [int(s) for s in args.n.split(",") if s.strip()]
    except ValueError:
        raise ConfigInvalid("n", f"expected comma-separated integers, got {args.n!r}") from None
    rows = survival_scaling(args.g0, ns, trials=args.trials, seed=args.seed)
    print(f"{'N':>6} {'delta':>8} {'empirical':>10} {'stderr':>9} {'analytic':>10} {'(1-g0^2/N)^N':>13} {'exp(-g0^2)':>10}")
    for r in rows:
        print(
            f"{r['N']:>6} {r['delta']:>8.3f} {r['no_flip_fraction']:>10.5f} {r['stderr']:>9.5f} "
            f"{r['analytic']:>10.6f} {r['finite_n_form']:>13.6f} {r['limit_reference']:>10.6f}"
        )
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(dump_json({"g0": args.g0, "trials": args.trials, "seed": args.seed, "rows": rows}) + "\n")
    return 0


def identity_checks(seed: int = 0):
    """Yield (name, worst deviation, bound) for the exact identities."""
    worst = 0.0
    count = 0
    for d in (8, 32, 128):
        lat = CyclicLattice(d)
        for steps in sorted({1, d // 4, d // 2}):
            for t in range(50):
                v = LatticePotential(trial_rng(seed, count).uniform(-1, 1, d))
                worst = max(worst, modular_commutator_check(lat, v, steps))
                count += 1
    yield "lattice modular commutator", worst, LATTICE_BOUND

    worst = 0.0
    for v0 in (0.0, math.pi / 4, math.pi / 2, math.pi):
        u = kicked_qubit_evolution(v0)
        target = math.cos(v0) * SIGMA_X + math.sin(v0) * SIGMA_Y
        worst = max(worst, float(np.max(np.abs(heisenberg_evolved(SIGMA_X, u).entries - target.entries))))
        worst = max(worst, float(np.max(np.abs(heisenberg_evolved(SIGMA_Z, u).entries - SIGMA_Z.entries))))
    yield "kicked qubit Heisenberg action", worst, 1e-12

    worst = 0.0
    nets = [build_single_mzi(f) for f in (0, math.pi)] + [build_double_mzi(f) for f in (0, math.pi / 2, math.pi)]
    nets.append(build_double_well(math.pi / 3))
    for net in nets:
        m = transfer(net).entries
        worst = max(worst, float(np.max(np.abs(m @ m.conj().T - np.eye(net.modes)))))
    yield "network unitarity", worst, 1e-12

    anti = SIGMA_X @ SIGMA_Z + SIGMA_Z @ SIGMA_X
    sq = max(float(np.max(np.abs((p @ p - IDENTITY2).entries))) for p in (SIGMA_X, SIGMA_Y, SIGMA_Z))
    yield "Pauli algebra", max(sq, float(np.max(np.abs(anti.entries)))), 1e-12

    u = matrix_exponential(SIGMA_X, 1j * math.pi / 2)
    yield "exp(i pi/2 sigma_x) = i sigma_x", float(np.max(np.abs(u.entries - 1j * SIGMA_X.entries))), 1e-12


def _cmd_check(args) -> int:
    ok = True
    for name, dev, bound in identity_checks():
        passed = dev <= bound
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'}  {name:<34} max deviation {dev:.3e} (bound {bound:.0e})")
    return 0 if ok else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="absim", description="Pre/postselected weak-measurement simulator.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a scenario config and emit a JSON report")
    r.add_argument("config")
    r.add_argument("--seed", type=int)
    r.add_argument("--trials", type=int)
    r.add_argument("--out")
    r.add_argument("--csv", help="write per-trial readings as CSV")
    r.add_argument("--workers", type=int, default=1)
    r.set_defaults(func=_cmd_run)

    s = sub.add_parser("scaling", help="no-flip survival versus ensemble size")
    s.add_argument("--g0", type=float, required=True)
    s.add_argument("--n", required=True, help="comma-separated ascending N values")
    s.add_argument("--trials", type=int, default=10000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=_cmd_scaling)

    c = sub.add_parser("check", help="run the exact-identity checks")
    c.set_defaults(func=_cmd_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigInvalid, ParseError) as exc:
        print(f"absim: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ZeroPostselection as exc:
        print(f"absim: ZeroPostselection: {exc}", file=sys.stderr)
        return EXIT_ZERO_POSTSELECTION
    except OSError as exc:
        print(f"absim: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
