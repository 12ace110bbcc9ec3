"""Command line entry point: ``jcrlab {secrecy,rmse,converge,train}``.

Each subcommand writes a CSV table into the output directory, a
gnuplot-ready ``.dat`` column file and PNG figures. The output directory is
``--out`` if given, else ``$JCRLAB_OUT``, else ``output_dir`` from the
config.
"""

import argparse
import logging
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

from . import config as config_mod
from . import experiments, io, plotting
from .autoencoder import save_weights

log = logging.getLogger("jcrlab")


def _output_dir(args, cfg):
    out = args.out or os.environ.get(config_mod.OUTPUT_ENV) or cfg.output_dir
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load(args):
    cfg = config_mod.load(args.config)
    if args.seed is not None:
        cfg = config_mod.validate(replace(cfg, seed=args.seed))
    return cfg


def _table(out, name, columns, rows, meta):
    path = io.write_table(out / f"{name}.csv", columns, rows, meta)
    log.info("wrote %s", path)
    return io.read_table(path)[1]


def cmd_secrecy(args, cfg, out):
    rows = _table(out, "secrecy", *experiments.run_secrecy_sweep(cfg, args.workers))
    plotting.write_columns(out / "secrecy.dat", rows, experiments.SECRECY_COLUMNS[1:], group="pipeline")
    if args.plots:
        plotting.plot_secrecy(rows, out / "secrecy.png")


def cmd_converge(args, cfg, out):
    rows = _table(out, "convergence", *experiments.run_convergence_trace(cfg, args.workers))
    plotting.write_columns(out / "convergence.dat", rows, experiments.CONVERGENCE_COLUMNS[1:4], group="scene")
    if args.plots:
        plotting.plot_convergence(rows, out / "convergence.png")


def cmd_rmse(args, cfg, out):
    rows = _table(out, "rmse", *experiments.run_rmse_sweep(cfg, args.workers))
    plotting.write_columns(out / "rmse.dat", rows, experiments.RMSE_COLUMNS[1:11], group="receiver")
    if args.plots:
        for rx in cfg.rmse.receivers:
            plotting.plot_rmse(rows, rx, out / f"rmse_{rx}.png")


def cmd_train(args, cfg, out):
    results = experiments.train_networks(cfg, args.workers)
    wdir = out / "weights"
    wdir.mkdir(exist_ok=True)
    summary, curves, trained = [], [], {}
    for (rx, snr, n), res in results.items():
        name = f"{rx}_snr{snr:g}_n{n}"
        if isinstance(res, Exception):
            summary.append([rx, snr, n, "", -1, 0, f"failed: {res}"])
            continue
        if id(res) not in trained:
            trained[id(res)] = wdir / f"ae_{name}.bin"
            save_weights(res.net, trained[id(res)])
        summary.append([rx, snr, n, trained[id(res)].name, res.best_epoch, len(res.train_loss), "ok"])
        curves += [[rx, snr, n, e, tr, va] for e, (tr, va) in enumerate(zip(res.train_loss, res.val_loss))]
    _table(out, "train", ["receiver", "snr_db", "train_variations", "weights", "best_epoch", "epochs_run",
                          "status"], summary, {"table": "trained networks", "seed": cfg.seed})
    rows = _table(out, "loss_curves", ["receiver", "snr_db", "train_variations", "epoch", "train_loss",
                                       "val_loss"], curves, {"loss": "batch-mean squared error per vector"})
    if args.plots:
        by_cell = {}
        for r in rows:
            tr, va = by_cell.setdefault(f"{r['receiver']} {r['snr_db']:g} dB n={r['train_variations']}", ([], []))
            tr.append(r["train_loss"])
            va.append(r["val_loss"])
        plotting.plot_loss_curves(by_cell, out / "loss_curves.png")


COMMANDS = {
    "secrecy": (cmd_secrecy, "secrecy and Bob rates over the antenna-count grid"),
    "rmse": (cmd_rmse, "autoencoder and baseline RMSE over the SNR grid"),
    "converge": (cmd_converge, "per-iteration secrecy rate of the alternating design"),
    "train": (cmd_train, "train the autoencoders only and save weights and loss curves"),
}


def build_parser():
    p = argparse.ArgumentParser(
        prog="jcrlab",
        description="Secrecy, convergence and denoising experiments for shared-spectrum radar and communication.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", help="TOML config file (defaults when omitted)")
        s.add_argument("--seed", type=int, help="master seed, overrides the config")
        s.add_argument("--out", help=f"output directory (overrides ${config_mod.OUTPUT_ENV} and the config)")
        s.add_argument("--workers", type=int, default=1, help="worker processes (results do not depend on it)")
        s.add_argument("--no-plots", dest="plots", action="store_false", help="skip PNG figures")
        s.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = _load(args)
    except config_mod.ConfigError as e:
        print(f"jcrlab: config error: {e}", file=sys.stderr)
        return 2
    if args.workers < 1:
        print("jcrlab: --workers must be >= 1", file=sys.stderr)
        return 2
    out = _output_dir(args, cfg)
    t0 = time.perf_counter()
    COMMANDS[args.command][0](args, cfg, out)
    log.info("%s finished in %.1f s", args.command, time.perf_counter() - t0)
    return 0


if __name__ == "__main__":
    sys.exit(main())
