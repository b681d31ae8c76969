"""Command-line entry point: ``pst {roc,success-table,compare,demo}``."""

import argparse
import json
import os
import sys

import numpy as np

from .exceptions import InvalidConfigError

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2

DEMO = {"n": 100, "r": 5, "m": 400, "q": 400, "theta_degrees": [45.0], "se0_target": 1e-4}


def _parser():
    default_threads = int(os.environ.get("PST_THREADS", "1"))
    p = argparse.ArgumentParser(prog="pst", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("roc", "detection ROC curves, one CSV per angle"),
        ("success-table", "PST-PCA success probabilities per (m, q, se0) cell"),
        ("compare", "error traces of PST-PCA+LRPR, LRPR-AltMin and Wirtinger flow"),
        ("demo", "small end-to-end detection and recovery run"),
    ]:
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", help="JSON experiment config")
        s.add_argument("--seed", type=int)
        s.add_argument("--runs", type=int)
        s.add_argument("--out", help="output directory")
        s.add_argument("--threads", type=int, default=default_threads)
    return p


def _config(args):
    from .experiments import ExperimentConfig, load_config

    overrides = {"seed": args.seed, "runs": args.runs, "output_dir": args.out}
    if args.config is None:
        base = dict(DEMO) if args.command == "demo" else {}
        base.update({k: v for k, v in overrides.items() if v is not None})
        return ExperimentConfig.from_dict(base)
    if not os.path.isfile(args.config):
        raise FileNotFoundError(args.config)
    return load_config(args.config, **overrides)


def _demo(config):
    from . import detection, model
    from .metrics import subspace_error
    from .pstpca import run_pst_pca

    rng = np.random.default_rng(config.seed)
    draw = model.draw_change(config.n, config.r, config.m, config.q,
                             np.deg2rad(config.theta_degrees[0]), config.lambda_bar, rng)
    u0_hat = model.perturb_subspace(draw.u_prev, config.se0_target, rng)
    ep = draw.episode
    outcome = detection.detect_change(ep.sensing, ep.magnitudes, u0_hat)
    print(f"detection: changed={outcome.changed} statistic={outcome.statistic:.4f} "
          f"C={outcome.threshold_c}")
    result = run_pst_pca(ep, u0_hat, config.t_max_pstpca, delta_tol=config.delta_tol)
    print(f"prior SE={subspace_error(u0_hat, draw.u_prev):.3e}")
    print(f"final SE={subspace_error(result.u_hat, ep.u_true):.3e} "
          f"norm_err={result.trace[-1].norm_err:.3e} "
          f"iterations={result.iterations} stop={result.stop_reason}")


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        config = _config(args)
    except FileNotFoundError as e:
        print(f"pst: config file not found: {e.args[0] if e.args else e}", file=sys.stderr)
        return EXIT_CONFIG
    except (InvalidConfigError, json.JSONDecodeError, TypeError) as e:
        print(f"pst: invalid config: {e}", file=sys.stderr)
        return EXIT_CONFIG

    print(json.dumps({"command": args.command, "threads": args.threads,
                      "config": config.to_dict()}, sort_keys=True))
    try:
        if args.command == "demo":
            _demo(config)
            return EXIT_OK
        from . import experiments

        if args.command == "roc":
            res = experiments.run_roc_experiment(config, threads=args.threads)
            paths = list(res.paths.values())
        elif args.command == "success-table":
            paths = [experiments.run_success_table(config, threads=args.threads).path]
        else:
            paths = list(experiments.run_comparison(config, threads=args.threads).paths.values())
    except Exception as e:  # noqa: BLE001 - reported as a runtime failure
        print(f"pst: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    for p in paths:
        print(p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
