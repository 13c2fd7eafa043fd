"""Command line entry point: ``expolab <command> ...``.

Exit codes: 0 success, 1 usage error, 2 unreadable or malformed input/output
(files, checkpoints, packs, configs, grids), 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import pathlib
import sys
from dataclasses import asdict, replace

from ..camsim import DarkroomEnv, PackFormatError, load_pack, make_pack, save_pack
from ..config import ConfigError, ExperimentConfig, dump_config, load_config
from ..dataset_env import GridLoadError, ManifestError, loads_grid_request
from ..imaging import DimensionError, FormatError
from ..nn import CheckpointError, read_mlp, save_mlp
from .evaluate import (AgentController, BuiltinAEController, NelderMeadController, RandomController,
                       bench_latency, compare, median_ftc, p90_ftc)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3
CONTROLLERS = ("drl", "builtin", "nm", "random")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _config(path) -> ExperimentConfig:
    return load_config(path) if path else ExperimentConfig()


def _counts(text: str) -> dict:
    counts = {}
    for part in text.split(","):
        name, sep, n = part.partition("=")
        if not sep:
            raise UsageError(f"bad count {part!r}; expected difficulty=N")
        try:
            counts[name.strip()] = int(n)
        except ValueError:
            raise UsageError(f"bad count {part!r}") from None
    return counts


def cmd_train(args) -> int:
    from ..sac.train import default_validation_specs, train

    cfg = _config(args.config)
    sac = cfg.sac if args.steps is None else replace(cfg.sac, total_steps=args.steps)
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    res = train(lambda: DarkroomEnv(cfg.env), sac, cfg.curriculum, args.seed,
                log_path=out / "train_log.csv", eval_log_path=out / "eval_log.csv",
                validation_specs=default_validation_specs(cfg.eval.validation_seed),
                epsilon=cfg.eval.epsilon)
    save_mlp(out / "actor_final.ckpt", res.agent.actor)
    save_mlp(out / "actor_best.ckpt", res.best_actor)
    (out / "config.txt").write_text(dump_config(replace(cfg, sac=sac)))
    print(f"best validation reward/frame {res.best_score:.4f}; checkpoints in {out}")
    return EXIT_OK


def _controllers(names, args, cfg):
    out = []
    for name in names:
        if name == "drl":
            if not args.checkpoint:
                raise UsageError("controller drl needs --checkpoint")
            out.append(AgentController(read_mlp(args.checkpoint)))
        elif name == "builtin":
            b = cfg.baseline
            out.append(BuiltinAEController(b.setpoint, b.kappa, b.deadband))
        elif name == "nm":
            out.append(NelderMeadController(cfg.baseline.nm_budget, cfg.baseline.nm_tol))
        elif name == "random":
            out.append(RandomController(args.seed))
        else:
            raise UsageError(f"unknown controller {name!r}; choose from {', '.join(CONTROLLERS)}")
    return out


def _summarize(results) -> None:
    for name, reps in results.items():
        conv = sum(r.converged for r in reps) / len(reps)
        print(f"{name:>8}: median ftc {median_ftc(reps):g}, p90 {p90_ftc(reps):g}, "
              f"converged {conv:.0%}, reward/frame {sum(r.reward_per_frame for r in reps) / len(reps):.4f}")


def cmd_compare(args) -> int:
    cfg = _config(args.config)
    names = [n.strip() for n in args.controllers.split(",") if n.strip()]
    ctrls = _controllers(names, args, cfg)
    eps = cfg.eval.epsilon if args.epsilon is None else args.epsilon
    results, _ = compare(ctrls, load_pack(args.scenarios), args.out, eps, replace(cfg.env, randomize=False))
    _summarize(results)
    return EXIT_OK


def cmd_eval(args) -> int:
    args.controllers = "drl"
    return cmd_compare(args)


def cmd_gen_grid(args) -> int:
    with open(args.spec) as fh:
        request = loads_grid_request(fh.read())
    manifest = request.run(args.out)
    print(f"wrote {len(manifest.cells)} frames and manifest.json to {args.out}")
    return EXIT_OK


def cmd_bench(args) -> int:
    stats = bench_latency(read_mlp(args.checkpoint), iterations=args.iters)
    print(json.dumps({k: asdict(v) for k, v in stats.items()}, indent=2))
    return EXIT_OK


def cmd_make_pack(args) -> int:
    specs = make_pack(_counts(args.counts), args.seed)
    save_pack(args.out, specs)
    print(f"wrote {len(specs)} scenarios to {args.out}")
    return EXIT_OK


def cmd_show_config(args) -> int:
    sys.stdout.write(dump_config(_config(args.config)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="expolab", description="Exposure-control lab")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="train an agent")
    p.add_argument("--config")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--steps", type=int)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a scenario pack")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--scenarios", required=True)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.set_defaults(func=cmd_eval, seed=0)

    p = sub.add_parser("compare", help="compare controllers on a scenario pack")
    p.add_argument("--controllers", default="drl,builtin,nm")
    p.add_argument("--scenarios", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--checkpoint")
    p.add_argument("--config")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--seed", type=int, default=0, help="seed of the random controller")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("gen-grid", help="render a synthetic exposure/gain grid")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_grid)

    p = sub.add_parser("bench", help="time one control decision")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--iters", type=int, default=10_000)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("make-pack", help="write a seeded scenario pack")
    p.add_argument("--counts", default="easy=40,normal=30,hard=30")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_make_pack)

    p = sub.add_parser("show-config", help="print the effective configuration")
    p.add_argument("--config")
    p.set_defaults(func=cmd_show_config)
    return ap


_DATA_ERRORS = (OSError, FormatError, DimensionError, PackFormatError, ManifestError, GridLoadError,
                CheckpointError, ConfigError)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(asctime)s %(message)s")
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (FloatingPointError, ArithmeticError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        # remaining value errors come from argument values (e.g. --iters too small)
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
