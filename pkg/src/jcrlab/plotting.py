"""Matplotlib figures and gnuplot column files for the experiment tables.

All functions take the row dicts returned by :func:`jcrlab.io.read_table`
(or built in memory) and write a PNG; nothing is shown on screen.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "figure.figsize": (6.0, 4.0),
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "legend.fontsize": 8,
    "savefig.dpi": 120,
}
PNG_META = {"Software": None}


def _rows(rows, **match):
    return [r for r in rows if all(r[k] == v for k, v in match.items())]


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, metadata=PNG_META)
    plt.close(fig)
    return path


def plot_secrecy(rows, path):
    """Bob rate and both secrecy rates against the communication antenna count."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        series = [("bob_rate", "Bob rate", "-"), ("rs_radar", "secrecy, radar eavesdropper", "--"),
                  ("rs_ext", "secrecy, external eavesdropper", ":")]
        for pipeline, marker in (("coop", "o"), ("pls", "s")):
            for n_d in sorted({r["n_radar_tx"] for r in rows}):
                sel = sorted(_rows(rows, pipeline=pipeline, n_radar_tx=n_d), key=lambda r: r["n_comm_tx"])
                if not sel:
                    continue
                n = [r["n_comm_tx"] for r in sel]
                for key, label, ls in series:
                    ax.errorbar(n, [r[f"{key}_mean"] for r in sel], yerr=[r[f"{key}_std"] for r in sel],
                                ls=ls, marker=marker, capsize=3,
                                label=f"{pipeline}, {n_d} radar tx: {label}")
        ax.set_xlabel("communication transmit antennas")
        ax.set_ylabel("rate (bits/s/Hz)")
        ax.legend()
        return _save(fig, path)


def plot_convergence(rows, path, max_traces=20):
    """Secrecy rate per iteration for the first ``max_traces`` scenes."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for k in sorted({r["scene"] for r in rows})[:max_traces]:
            sel = _rows(rows, scene=k)
            ax.plot([r["iteration"] for r in sel], [r["secrecy_rate"] for r in sel], marker=".", lw=1)
        ax.set_xlabel("iteration")
        ax.set_ylabel("secrecy rate (bits/s/Hz)")
        return _save(fig, path)


def plot_rmse(rows, receiver, path):
    """RMSE against SNR for one receiver: one autoencoder curve per training-set size."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        sel = _rows(rows, receiver=receiver)
        sizes = sorted({r["train_variations"] for r in sel})
        for n in sizes:
            pts = sorted(_rows(sel, train_variations=n), key=lambda r: r["snr_db"])
            ax.semilogy([r["snr_db"] for r in pts], [r["autoencoder_rmse"] for r in pts],
                        marker="o", label=f"autoencoder, {n} training variations")
        pts = sorted(_rows(sel, train_variations=sizes[0]), key=lambda r: r["snr_db"])
        snr = [r["snr_db"] for r in pts]
        for key, label, ls in (("null_projection", "null-space projection", "--"),
                               ("oracle", "known-channel floor", ":"), ("raw", "raw record", "-.")):
            ax.semilogy(snr, [r[f"{key}_rmse"] for r in pts], ls=ls, color="k" if key == "oracle" else None,
                        label=label)
        ax.set_xlabel("SNR (dB)")
        ax.set_ylabel("RMSE")
        ax.set_title(f"{receiver} receiver")
        ax.legend()
        return _save(fig, path)


def plot_loss_curves(curves, path):
    """``curves`` maps a label to (train_loss, val_loss) sequences."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for label, (tr, va) in curves.items():
            line, = ax.semilogy(tr, lw=1, label=f"{label} train")
            ax.semilogy(va, lw=1, ls="--", color=line.get_color())
        ax.set_xlabel("epoch")
        ax.set_ylabel("loss (dashed: validation)")
        ax.legend(fontsize=6)
        return _save(fig, path)


def write_columns(path, rows, columns, group=None):
    """Whitespace-separated columns for gnuplot; blank-line pairs between groups become indexes."""
    with open(path, "w") as f:
        f.write("# " + " ".join(columns) + "\n")
        last = None
        for i, r in enumerate(rows):
            if group is not None and (i == 0 or r[group] != last):
                if i:
                    f.write("\n\n")
                f.write(f"# {group} = {r[group]}\n")
                last = r[group]
            f.write(" ".join(_gp(r[c]) for c in columns) + "\n")
    return path


def _gp(v):
    if isinstance(v, float):
        return "NaN" if np.isnan(v) else "%.8g" % v
    return str(v)
