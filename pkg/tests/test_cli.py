import csv
import json

import numpy as np
import pytest

from expolab.camsim import load_pack
from expolab.harness.cli import EXIT_DATA, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, main
from expolab.nn import Mlp, read_mlp, save_mlp


@pytest.fixture
def pack(tmp_path):
    path = tmp_path / "pack.txt"
    assert main(["make-pack", "--seed", "4", "--counts", "easy=2,hard=1", "--out", str(path)]) == EXIT_OK
    return path


@pytest.fixture
def checkpoint(tmp_path):
    path = tmp_path / "actor.ckpt"
    save_mlp(path, Mlp((512, 16, 4), np.random.default_rng(0)))
    return path


def test_make_pack(pack):
    specs = load_pack(pack)
    assert [s.difficulty for s in specs] == ["easy", "easy", "hard"]


def test_compare_writes_csv(tmp_path, pack, checkpoint, capsys):
    out = tmp_path / "cmp.csv"
    code = main(["compare", "--controllers", "drl,builtin,nm", "--scenarios", str(pack),
                 "--checkpoint", str(checkpoint), "--out", str(out)])
    assert code == EXIT_OK
    with open(out, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 3 * 3 + 3
    assert "median ftc" in capsys.readouterr().out


def test_eval_is_repeatable(tmp_path, pack, checkpoint):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert main(["eval", "--checkpoint", str(checkpoint), "--scenarios", str(pack),
                     "--epsilon", "0.02", "--out", str(out)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_train_small(tmp_path):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("sac.hidden = 8, 8\nsac.batch_size = 8\nsac.initial_random_steps = 20\n"
                   "sac.eval_every = 0\nenv.episode_length = 20\n")
    out = tmp_path / "run"
    assert main(["train", "--config", str(cfg), "--seed", "1", "--out", str(out), "--steps", "60"]) == EXIT_OK
    actor = read_mlp(out / "actor_final.ckpt")
    assert actor.dims == (512, 8, 8, 4)
    assert (out / "train_log.csv").exists() and (out / "config.txt").exists()


def test_gen_grid(tmp_path):
    spec = tmp_path / "grid.txt"
    spec.write_text("preset = custom\nexposure_us = 1000, 4000\ngain_db = 0, 6\nwidth = 16\nheight = 16\n")
    out = tmp_path / "grid"
    assert main(["gen-grid", "--spec", str(spec), "--out", str(out)]) == EXIT_OK
    assert len(list(out.glob("*.pgm"))) == 4 and (out / "manifest.json").exists()


def test_bench(checkpoint, capsys):
    assert main(["bench", "--checkpoint", str(checkpoint), "--iters", "1000"]) == EXIT_OK
    stats = json.loads(capsys.readouterr().out)
    assert stats["agent"]["iterations"] == 1000


def test_show_config(capsys):
    assert main(["show-config"]) == EXIT_OK
    assert "reward.target = 0.5" in capsys.readouterr().out


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["compare", "--scenarios", "x"],
    ["bench", "--checkpoint", "x", "--iters", "ten"],
    ["make-pack", "--seed", "1", "--counts", "weird=2", "--out", "x"],
])
def test_usage_errors(argv):
    assert main(argv) == EXIT_USAGE


def test_compare_drl_needs_checkpoint(tmp_path, pack):
    assert main(["compare", "--controllers", "drl", "--scenarios", str(pack),
                 "--out", str(tmp_path / "o.csv")]) == EXIT_USAGE


def test_bench_too_few_iterations(checkpoint):
    assert main(["bench", "--checkpoint", str(checkpoint), "--iters", "10"]) == EXIT_USAGE


def test_data_errors(tmp_path, pack, checkpoint):
    bad = tmp_path / "bad.ckpt"
    bad.write_bytes(b"garbage")
    assert main(["bench", "--checkpoint", str(bad)]) == EXIT_DATA
    assert main(["bench", "--checkpoint", str(tmp_path / "missing")]) == EXIT_DATA
    junk = tmp_path / "junk.txt"
    junk.write_text("this is not a pack\n")
    assert main(["eval", "--checkpoint", str(checkpoint), "--scenarios", str(junk),
                 "--out", str(tmp_path / "o.csv")]) == EXIT_DATA
    assert main(["eval", "--checkpoint", str(checkpoint), "--scenarios", str(pack),
                 "--out", str(tmp_path / "no" / "o.csv")]) == EXIT_DATA
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("sac.nope = 1\n")
    assert main(["show-config", "--config", str(cfg)]) == EXIT_DATA
    grid = tmp_path / "g.txt"
    grid.write_text("preset = moon\n")
    assert main(["gen-grid", "--spec", str(grid), "--out", str(tmp_path / "g")]) == EXIT_DATA


def test_numeric_error(tmp_path, pack):
    net = Mlp((512, 16, 4), np.random.default_rng(0))
    net.params[0][...] = np.nan
    path = tmp_path / "nan.ckpt"
    save_mlp(path, net)
    assert main(["eval", "--checkpoint", str(path), "--scenarios", str(pack),
                 "--out", str(tmp_path / "o.csv")]) == EXIT_NUMERIC
