"""Train the exposure-control agent at desk scale and save its checkpoints.

    python scripts/train_agent.py --out runs/main --seed 0 [--steps 100000]
"""

import argparse
import logging
import pathlib
import time
from dataclasses import replace

from expolab.camsim import DarkroomEnv
from expolab.nn import save_mlp
from expolab.sac import CurriculumSchedule, SacConfig
from expolab.sac.train import train


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="runs/main")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--steps", type=int, default=100_000)
    ap.add_argument("--curriculum", default="literal", choices=("literal", "monotone"))
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg = replace(SacConfig(), total_steps=args.steps)
    t0 = time.time()
    res = train(DarkroomEnv, cfg, CurriculumSchedule(mode=args.curriculum), args.seed,
                log_path=out / "train_log.csv", eval_log_path=out / "eval_log.csv")
    save_mlp(out / "actor_final.ckpt", res.agent.actor)
    save_mlp(out / "actor_best.ckpt", res.best_actor)
    logging.info("done in %.0f s; best validation reward/frame %.4f", time.time() - t0, res.best_score)


if __name__ == "__main__":
    main()
