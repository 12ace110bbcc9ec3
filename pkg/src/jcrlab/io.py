"""Delimited-text tables and receive-record files.

Tables are CSV: optional ``# key: value`` comment lines, one header row,
then data rows. Floats are written with 8 significant digits so reruns are
byte-identical.

Receive records are text too::

    # receive-record n_rx=<N> n_snapshots=<T>
    re(y[0,0]) im(y[0,0]) re(y[0,1]) im(y[0,1]) ...   (one line per antenna)

with ``%.17g`` values, which round-trips float64 exactly.
"""

import csv
import io as _io
import re

import numpy as np

RECORD_HEADER = re.compile(r"#\s*receive-record\s+n_rx=(\d+)\s+n_snapshots=(\d+)")


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.8g" % v
    return str(v)


def format_table(columns, rows, meta=None):
    buf = _io.StringIO()
    for k, v in (meta or {}).items():
        buf.write(f"# {k}: {v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        if isinstance(row, dict):
            row = [row[c] for c in columns]
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def write_table(path, columns, rows, meta=None):
    text = format_table(columns, rows, meta)
    with open(path, "w", newline="") as f:
        f.write(text)
    return path


def read_table(path):
    """Returns (meta dict, list of row dicts with numeric fields converted)."""
    meta, lines = {}, []
    with open(path) as f:
        for line in f:
            if line.startswith("#"):
                k, _, v = line[1:].partition(":")
                meta[k.strip()] = v.strip()
            else:
                lines.append(line)
    rows = []
    for row in csv.DictReader(lines):
        rows.append({k: _parse(v) for k, v in row.items()})
    return meta, rows


def _parse(v):
    for kind in (int, float):
        try:
            return kind(v)
        except ValueError:
            pass
    return v


def write_record(path, samples):
    samples = np.asarray(samples, dtype=complex)
    n_rx, t = samples.shape
    inter = np.empty((n_rx, 2 * t))
    inter[:, 0::2] = samples.real
    inter[:, 1::2] = samples.imag
    with open(path, "w") as f:
        f.write(f"# receive-record n_rx={n_rx} n_snapshots={t}\n")
        np.savetxt(f, inter, fmt="%.17g")


def read_record(path):
    with open(path) as f:
        m = RECORD_HEADER.match(f.readline())
        if not m:
            raise ValueError(f"{path}: missing receive-record header")
        n_rx, t = int(m.group(1)), int(m.group(2))
        vals = np.loadtxt(f, ndmin=2)
    if vals.shape != (n_rx, 2 * t):
        raise ValueError(f"{path}: expected {n_rx}x{2 * t} values, found {vals.shape}")
    return vals[:, 0::2] + 1j * vals[:, 1::2]
