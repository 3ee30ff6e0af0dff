"""``locsim`` command line: run the benchmark, validate configs, print oracle tables."""

from __future__ import annotations

import argparse
import logging
import sys
import time

from locsim.sim.config import ConfigError, load_config, paper_fig2_config


def _config(path):
    return paper_fig2_config() if path is None else load_config(path)


def _cmd_run(args) -> int:
    from locsim.sim.runner import run_monte_carlo, write_outputs

    cfg = _config(args.config)
    start = time.perf_counter()
    result = run_monte_carlo(cfg, trials=args.trials, seed=args.seed, workers=args.workers)
    paths = write_outputs(result, args.out)
    elapsed = time.perf_counter() - start
    for path in paths:
        print(path)
    for name in cfg.algorithms:
        avg = result.window_average(name)
        print(f"{name:9s} theta_err {avg['theta_err_mean']:.5f}  pos_err {avg['pos_err_mean']:.5f}")
    if result.failures:
        print(f"{len(result.failures)} filter failure(s); see manifest.txt", file=sys.stderr)
    print(f"elapsed {elapsed:.1f} s", file=sys.stderr)
    return 0


def _cmd_validate(args) -> int:
    cfg = _config(args.config)
    print(f"ok: {cfg.steps} steps, observation every {cfg.obs_every} steps, algorithms {', '.join(cfg.algorithms)}")
    return 0


def _cmd_oracle(args) -> int:
    from locsim.oracles import run_oracle

    bad = 0
    for name, rows in run_oracle(args.name):
        print(f"== {name}")
        print(f"  {'quantity':44s} {'library':>18s} {'oracle':>18s} {'abs err':>9s} {'tol':>8s}")
        for r in rows:
            flag = "ok" if r.ok else "MISMATCH"
            bad += not r.ok
            print(f"  {r.quantity:44s} {r.value:18.12g} {r.oracle:18.12g} {r.err:9.2e} {r.tol:8.1e}  {flag}")
    return 1 if bad else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="locsim", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true", help="log filter failures")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Monte Carlo comparison, writes CSV traces and a summary")
    run.add_argument("--config", help="scenario file (default: shipped paper_fig2.cfg)")
    run.add_argument("--trials", type=int, help="override sim.trials")
    run.add_argument("--seed", type=int, help="override sim.seed")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--workers", type=int, default=1, help="worker processes (results do not depend on it)")
    run.set_defaults(func=_cmd_run)

    val = sub.add_parser("validate", help="parse and check a scenario file")
    val.add_argument("--config", help="scenario file (default: shipped paper_fig2.cfg)")
    val.set_defaults(func=_cmd_validate)

    from locsim.oracles import ORACLES

    ora = sub.add_parser("oracle", help="compare library values against independent reference computations")
    ora.add_argument("name", choices=sorted(ORACLES) + ["all"])
    ora.set_defaults(func=_cmd_oracle)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, OSError) as exc:
        print(f"locsim: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
