"""Command-line entry point: ``irs-spectrum {run,validate,oracle}``."""

import argparse
import logging
import sys
import time

import numpy as np

from .sim import ConfigError, format_summary, load_config, run_sweep, summarize, write_results

log = logging.getLogger("irs_spectrum")


def _cmd_run(args):
    config = load_config(args.config)
    designs = args.designs.split(",") if args.designs else None
    config = config.with_overrides(designs=designs, setup_id=args.setup, trials=args.trials,
                                   master_seed=args.seed, workers=args.workers)
    t0 = time.perf_counter()

    def progress(done):
        if args.verbose:
            log.info("trial %d/%d done", done, config.trials)

    records = run_sweep(config, progress=progress)
    try:
        write_results(records, args.output)
    except OSError as exc:
        print(f"error: cannot write {args.output}: {exc.strerror or exc}", file=sys.stderr)
        return 2
    if not args.quiet:
        print(format_summary(summarize(records)))
    log.info("%d records in %.1f s -> %s", len(records), time.perf_counter() - t0, args.output)
    return 0


def _cmd_validate(args):
    config = load_config(args.config)
    print(f"{args.config}: ok (setup {config.setup_id}, N={config.n_elements}, "
          f"{config.trials} trials, {len(config.sweep_dbm)} sweep points, "
          f"designs {','.join(config.designs)})")
    return 0


def _cmd_oracle(args):
    # imported lazily: only this subcommand needs the brute-force module
    from .ao import solve_ao
    from .lowcomplexity import gaussian_randomize, sdr_solve
    from .numerics import outer_product
    from .oracles import check_power_oracle, exhaustive_quadratic_min, exhaustive_rate, random_instance

    rng = np.random.default_rng(args.seed)
    results = []

    worst = check_power_oracle(rng, count=args.instances * 10)
    results.append(("closed-form power vs 1e5-point grid", worst <= 1.0, f"worst {worst:.3f} steps"))

    gaps = []
    for i in range(args.instances):
        ch, params = random_instance(rng, 3)
        best, _ = exhaustive_rate(ch, params, levels=64)
        res = solve_ao(ch, params, rng=np.random.default_rng([args.seed, i]))
        gaps.append((best - res.rate) / best if best > 0 else 0.0)
    median = float(np.median(gaps))
    results.append(("AO vs exhaustive 64^3 rate (median gap <= 15%)", median <= 0.15, f"median gap {median:.4f}"))

    bound_ok, rand_ok = 0, 0
    for _ in range(args.instances):
        hbar = (rng.standard_normal(4) + 1j * rng.standard_normal(4)) / np.sqrt(2.0)
        H = outer_product(hbar)
        best = exhaustive_quadratic_min(H, levels=64)
        V = sdr_solve(H)
        bound_ok += float(np.trace(H @ V).real) <= best + 1e-6
        x = gaussian_randomize(V, H, 1000, rng)
        scale = (abs(hbar[-1]) + np.abs(hbar[:-1]).sum()) ** 2
        rand_ok += float((x.conj() @ H @ x).real) <= best + 0.05 * scale
    results.append(("SDR bound vs exhaustive (all instances)", bound_ok == args.instances,
                    f"{bound_ok}/{args.instances}"))
    results.append(("randomization within 5% (>= 90% of instances)", rand_ok >= 0.9 * args.instances,
                    f"{rand_ok}/{args.instances}"))

    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return 0 if all(ok for _, ok, _ in results) else 1


def build_parser():
    parser = argparse.ArgumentParser(prog="irs-spectrum", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a Monte Carlo sweep and write a CSV")
    run.add_argument("config", help="YAML scenario file")
    run.add_argument("-o", "--output", required=True, help="CSV output path")
    run.add_argument("--designs", help="comma-separated design tags (overrides the config)")
    run.add_argument("--setup", type=int, choices=(1, 2, 3), help="setup id override")
    run.add_argument("--trials", type=int, help="trial count override")
    run.add_argument("--seed", type=int, help="master seed override")
    run.add_argument("--workers", type=int, help="worker processes (results do not depend on it)")
    run.add_argument("-q", "--quiet", action="store_true", help="do not print the summary table")
    run.set_defaults(func=_cmd_run)

    validate = sub.add_parser("validate", help="check a scenario file")
    validate.add_argument("config")
    validate.set_defaults(func=_cmd_validate)

    oracle = sub.add_parser("oracle", help="small-N brute-force verification suite")
    oracle.add_argument("--instances", type=int, default=50)
    oracle.add_argument("--seed", type=int, default=0)
    oracle.set_defaults(func=_cmd_oracle)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
