"""Command line interface.

Exit codes: 0 success, 1 invariant violation (including lattices that do not
reconstruct the frequency set), 2 construction failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .freqset import WeightSpec, build_AdN, build_In, read_freqset, truncation_error, write_freqset
from .harness import ZOO_NAMES, ExperimentConfig, gamma_from_rule, run_convergence, zoo
from .korobov import choose_rate, wc_error_bound
from .lattice import (ConstructionError, ConstructionOptions, construct, lattice_hash,
                      partition, read_lattice, verify, write_lattice)
from .spectral import LatticeSamples, TrigPolynomial, reconstruct

EXIT_OK, EXIT_INVARIANT, EXIT_CONSTRUCTION = 0, 1, 2


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


def _spec(args) -> WeightSpec:
    tokens = [t for tok in args.gamma for t in tok.split(",") if t]
    if len(tokens) == 1 and ":" in tokens[0]:
        if args.d is None:
            raise SystemExit("a gamma rule needs --d")
        return WeightSpec(args.alpha, gamma_from_rule(tokens[0], args.d))
    gamma = [float(g) for g in tokens]
    if args.d is not None and args.d != len(gamma):
        raise SystemExit(f"--d {args.d} does not match {len(gamma)} weights")
    return WeightSpec(args.alpha, tuple(gamma))


def _add_spec_args(p, required=True) -> None:
    p.add_argument("--alpha", type=float, required=required, help="smoothness > 1")
    p.add_argument("--gamma", nargs="+", required=required,
                   help="weights g1,g2,... (or space separated) or a rule such as power:2 or geometric:0.5")
    p.add_argument("--d", type=int, default=None, help="dimension, required with a gamma rule")


def cmd_freqset(args) -> int:
    spec = _spec(args)
    if (args.N is None) == (args.n is None):
        raise SystemExit("give exactly one of --N and --n")
    I = build_AdN(spec, args.N) if args.N is not None else build_In(spec, args.n)
    if args.out:
        write_freqset(I, args.out)
    _emit({"d": spec.d, "count": len(I), "truncation_error": truncation_error(spec, I),
           "out": args.out})
    return EXIT_OK


def cmd_lattice_build(args) -> int:
    I = read_freqset(args.freqset)
    try:
        mlat = construct(I, seed=args.seed, opts=ConstructionOptions(max_retries=args.max_retries))
    except ConstructionError as exc:
        print(json.dumps({"error": str(exc), "attempts": exc.attempts}), file=sys.stderr)
        return EXIT_CONSTRUCTION
    write_lattice(mlat, args.out, seed=args.seed)
    _emit({"L": mlat.L, "sizes": mlat.sizes, "node_count": mlat.node_count(),
           "attempts": len(mlat.meta["attempts"]), "out": args.out})
    return EXIT_OK


def cmd_lattice_verify(args) -> int:
    I = read_freqset(args.freqset)
    lattices, _ = read_lattice(args.lattice)
    report = verify(lattices, I)
    _emit(report.to_dict())
    return EXIT_OK if report.ok else EXIT_INVARIANT


def _load_function(args, spec_needed):
    name = args.function
    if name in ZOO_NAMES:
        params = {}
        if args.N2 is not None:
            params["N"] = args.N2
        if args.h0 is not None:
            params["h0"] = args.h0
        if args.fseed is not None:
            params["seed"] = args.fseed
        spec = spec_needed()
        return zoo(name, spec, **params).coefficients
    path = Path(name)
    if not path.exists():
        raise SystemExit(f"{name!r} is neither a test function ({', '.join(ZOO_NAMES)}) nor a file")
    return TrigPolynomial.from_json_dict(json.loads(path.read_text()))


def cmd_approx_run(args) -> int:
    I = read_freqset(args.freqset)
    lattices, _ = read_lattice(args.lattice)
    mlat = partition(lattices, I)
    if not mlat.is_complete:
        print(f"lattice leaves {len(I) - mlat.covered_count} frequencies uncovered", file=sys.stderr)
        return EXIT_INVARIANT

    def spec_needed():
        if args.alpha is None or args.gamma is None:
            raise SystemExit("--alpha and --gamma are required for this test function")
        return _spec(args)

    if args.samples:
        samples = LatticeSamples.read(args.samples)
    else:
        if args.function is None:
            raise SystemExit("give --function or --samples")
        samples = LatticeSamples.from_polynomial(_load_function(args, spec_needed), lattices)
    try:
        samples.check_against(lattices)
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INVARIANT
    if args.samples_out:
        samples.write(args.samples_out)
    approx = reconstruct(samples, mlat)
    out = approx.to_json_dict()
    out["lattice_hash"] = lattice_hash(lattices)
    Path(args.out).write_text(json.dumps(out) + "\n")
    _emit({"coefficients": len(approx), "out": args.out})
    return EXIT_OK


def cmd_rates(args) -> int:
    try:
        params = choose_rate(args.alpha, args.alpha_tilde, args.t)
    except ValueError as exc:
        raise SystemExit(str(exc))
    _emit(params.to_dict())
    return EXIT_OK


def cmd_bounds(args) -> int:
    spec = _spec(args)
    I = read_freqset(args.freqset, spec)
    lattices, _ = read_lattice(args.lattice)
    mlat = partition(lattices, I)
    if not mlat.is_complete:
        print(f"lattice leaves {len(I) - mlat.covered_count} frequencies uncovered", file=sys.stderr)
        return EXIT_INVARIANT
    _emit(wc_error_bound(mlat, spec).to_dict())
    return EXIT_OK


def cmd_convergence(args) -> int:
    cfg = ExperimentConfig.read(args.config)
    if args.csv:
        cfg.csv_path = args.csv
    if args.json:
        cfg.json_path = args.json
    record = run_convergence(cfg)
    print(record.csv_text(), end="")
    if record.failed:
        print(f"{len(record.failed)} row(s) failed to construct a lattice", file=sys.stderr)
        return EXIT_CONSTRUCTION
    problems = record.violations()
    for msg in problems:
        print(msg, file=sys.stderr)
    return EXIT_INVARIANT if problems else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="multilattice", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("freqset", help="build A_d(N) or the n-1 lowest-weight frequencies")
    _add_spec_args(p)
    p.add_argument("--N", type=float, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_freqset)

    p = sub.add_parser("lattice", help="build or verify a multiple rank-1 lattice")
    lsub = p.add_subparsers(dest="action", required=True)
    b = lsub.add_parser("build")
    b.add_argument("--freqset", required=True)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--max-retries", type=int, default=20)
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_lattice_build)
    v = lsub.add_parser("verify")
    v.add_argument("--freqset", required=True)
    v.add_argument("--lattice", required=True)
    v.set_defaults(func=cmd_lattice_verify)

    p = sub.add_parser("approx", help="reconstruct Fourier coefficients from lattice samples")
    asub = p.add_subparsers(dest="action", required=True)
    r = asub.add_parser("run")
    r.add_argument("--freqset", required=True)
    r.add_argument("--lattice", required=True)
    r.add_argument("--function", default=None, help=f"one of {', '.join(ZOO_NAMES)} or a coefficient JSON file")
    r.add_argument("--samples", default=None, help="read samples from this file instead of --function")
    r.add_argument("--samples-out", default=None)
    r.add_argument("--out", required=True)
    _add_spec_args(r, required=False)
    r.add_argument("--N2", type=float, default=None, help="support level of unit-ball / kernel-slice")
    r.add_argument("--h0", type=int, nargs="+", default=None, help="frequency of the exp function")
    r.add_argument("--fseed", type=int, default=None, help="seed of the unit-ball function")
    r.set_defaults(func=cmd_approx_run)

    p = sub.add_parser("rates", help="rate parameters delta and tau for a target rate t")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--alpha-tilde", type=float, required=True)
    p.add_argument("--t", type=float, required=True)
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("bounds", help="worst-case error bound of a lattice")
    p.add_argument("--freqset", required=True)
    p.add_argument("--lattice", required=True)
    _add_spec_args(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("convergence", help="run a convergence study")
    p.add_argument("--config", required=True)
    p.add_argument("--csv", default=None)
    p.add_argument("--json", default=None)
    p.set_defaults(func=cmd_convergence)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
