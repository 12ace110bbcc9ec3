"""Seeded Monte-Carlo runners behind the CLI subcommands.

Every random draw comes from ``SeedSequence(seed, spawn_key=cell key)``,
so a cell's result does not depend on evaluation order or on the other
cells in the sweep. Runners return ``(columns, rows, meta)`` ready for
:func:`jcrlab.io.write_table`.
"""

from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import autoencoder as ae
from .baselines import known_channel_oracle
from .beamforming import (
    InfeasibleNullError,
    PlsProblemSpec,
    SubproblemInfeasible,
    relative_change,
    sca_solve,
    solve_coop_comm,
    solve_coop_radar,
)
from .contextual import ContextGenerator, ContextParams
from .receiver import radar_rate, rate, secrecy_rate, sinr_bob, sinr_eve_bounded, sinr_radar_eavesdropper
from .scenario import random_scene
from .sdp import ExtractionError

SECRECY_STREAM = 1
CONVERGE_STREAM = 2
TRAIN_STREAM, TEST_STREAM = 0, 1
METRICS = ("bob_rate", "rs_radar", "rs_ext", "radar_rate")
SOLVER_ERRORS = (InfeasibleNullError, SubproblemInfeasible, ExtractionError)

SECRECY_COLUMNS = (
    ["pipeline", "n_comm_tx", "n_radar_tx", "n_ok", "n_failed", "n_unconverged"]
    + [f"{m}_{s}" for m in METRICS for s in ("mean", "std")]
)
CONVERGENCE_COLUMNS = ["scene", "iteration", "secrecy_rate", "relative_change", "converged"]
RMSE_COLUMNS = (
    ["receiver", "snr_db", "train_variations"]
    + [f"{m}_{s}" for m in ("autoencoder", "null_projection", "oracle", "raw") for s in ("rmse", "std")]
    + ["n_test", "best_epoch", "epochs_run", "status"]
)


def stream(seed, *key):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key)))


def _map(fn, items, workers):
    if workers <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(workers) as ex:
        return list(ex.map(fn, items))


def secrecy_metrics(scene, w_ab, w_k):
    """Rates for rank-1 weights ``w_ab``, ``w_k`` (unit-norm vectors)."""
    wa = np.outer(w_ab, w_ab.conj())
    wk = np.outer(w_k, w_k.conj())
    g_b = sinr_bob(scene, wa, wk)
    return {
        "bob_rate": rate(g_b),
        "rs_radar": secrecy_rate(g_b, sinr_radar_eavesdropper(scene, wa, wk)),
        "rs_ext": secrecy_rate(g_b, sinr_eve_bounded(scene, wa, wk)),
        "radar_rate": radar_rate(scene, wa, wk),
    }


def _secrecy_realization(args):
    cfg, n_a, n_d, r = args
    params = cfg.scene.with_(n_comm_tx=n_a, n_radar_tx=n_d)
    # keyed by realization only: every antenna count sees the same layouts and fading
    scene = random_scene(params, stream(cfg.seed, SECRECY_STREAM, r))
    s = cfg.secrecy
    out = {}
    try:
        w_ab = solve_coop_comm(scene).weight
        w_k = solve_coop_radar(scene, s.bob_nulling).weight
        out["coop"] = ("ok", secrecy_metrics(scene, w_ab, w_k))
    except SOLVER_ERRORS as e:
        out["coop"] = (f"failed: {e}", None)
    try:
        spec = PlsProblemSpec(scene, s.r_th, s.eps_converge, s.m_max, s.bob_nulling, seed=r)
        sol = sca_solve(spec)
        status = "ok" if sol.converged else "unconverged"
        out["pls"] = (status, secrecy_metrics(scene, sol.w_ab, sol.w_k))
    except SOLVER_ERRORS as e:
        out["pls"] = (f"failed: {e}", None)
    return out


def secrecy_realizations(cfg, workers=1):
    """Per-realization outcomes as ``{(n_comm_tx, n_radar_tx, r): {pipeline: (status, metrics)}}``."""
    s = cfg.secrecy
    jobs = [(cfg, n_a, n_d, r) for n_d in s.radar_tx_counts for n_a in s.antenna_counts
            for r in range(s.realizations)]
    return {job[1:]: res for job, res in zip(jobs, _map(_secrecy_realization, jobs, workers))}


def run_secrecy_sweep(cfg, workers=1, details=None):
    """Cooperative and joint-secrecy pipelines over the antenna-count grid.

    Pass a dict as ``details`` to receive the per-realization outcomes.
    """
    s = cfg.secrecy
    cells = [(n_a, n_d) for n_d in s.radar_tx_counts for n_a in s.antenna_counts]
    results = secrecy_realizations(cfg, workers)
    if details is not None:
        details.update(results)
    rows = []
    for pipeline in ("coop", "pls"):
        for n_a, n_d in cells:
            outs = [results[n_a, n_d, r][pipeline] for r in range(s.realizations)]
            ok = [m for st, m in outs if st == "ok"]
            row = {"pipeline": pipeline, "n_comm_tx": n_a, "n_radar_tx": n_d, "n_ok": len(ok),
                   "n_failed": sum(st.startswith("failed") for st, _ in outs),
                   "n_unconverged": sum(st == "unconverged" for st, _ in outs)}
            for m in METRICS:
                vals = np.array([x[m] for x in ok])
                row[f"{m}_mean"] = float(vals.mean()) if ok else float("nan")
                row[f"{m}_std"] = float(vals.std()) if ok else float("nan")
            rows.append(row)
    meta = {
        "table": "average rates over realizations (bits/s/Hz); std is the population std",
        "pipelines": "coop = independent nulling designs; pls = alternating secrecy design",
        "rs_radar": "secrecy rate with the radar receiver as eavesdropper",
        "rs_ext": f"secrecy rate against the external eavesdropper, worst case over radius {cfg.scene.eve_radius} m",
        "seed": cfg.seed,
        "realizations": s.realizations,
    }
    return SECRECY_COLUMNS, rows, meta


def _trace_one(args):
    cfg, k = args
    params = cfg.scene.with_(n_comm_tx=cfg.convergence.n_comm_tx)
    scene = random_scene(params, stream(cfg.seed, CONVERGE_STREAM, k))
    s = cfg.secrecy
    try:
        sol = sca_solve(PlsProblemSpec(scene, s.r_th, s.eps_converge, s.m_max, s.bob_nulling, seed=k))
    except SOLVER_ERRORS:
        return k, None, False
    return k, sol.history, sol.converged


def run_convergence_trace(cfg, workers=1):
    jobs = [(cfg, k) for k in range(cfg.convergence.scenes)]
    rows, n_conv, n_fail = [], 0, 0
    for k, hist, conv in _map(_trace_one, jobs, workers):
        if hist is None:
            n_fail += 1
            continue
        n_conv += conv
        for m, val in enumerate(hist):
            rel = relative_change(hist[m], hist[m - 1]) if m else float("nan")
            rows.append([k, m, val, rel, conv])
    meta = {
        "table": "secrecy rate per iteration of the alternating design",
        "converged": f"{n_conv}/{cfg.convergence.scenes}",
        "failed": n_fail,
        "stopping_rule": f"relative change <= {cfg.secrecy.eps_converge} or {cfg.secrecy.m_max} iterations",
        "seed": cfg.seed,
    }
    return CONVERGENCE_COLUMNS, rows, meta


def context_for(cfg, snr_db):
    r = cfg.rmse
    return ContextParams(r.n_snapshots, snr_db, r.sir_db, 4, r.pilot_mode, r.fading_mode)


def _train_cfg(cfg, key):
    t = cfg.train
    seed = int(np.random.SeedSequence(cfg.seed, spawn_key=key).generate_state(1)[0])
    return ae.TrainConfig(t.epochs, t.batch_size, t.learning_rate, t.momentum, t.patience, seed, t.optimizer)


def train_one(cfg, inputs, targets, key):
    """Train one network on ``inputs`` -> ``targets`` with init and shuffling keyed by ``key``."""
    t = cfg.train
    init = stream(cfg.seed, 7, *key)
    net = ae.AutoencoderNet.init(ae.default_sizes(inputs.shape[1]), init, ae.input_scale_for(inputs))
    return ae.train(net, ae.TrainingSet(inputs, targets, t.validation_fraction), _train_cfg(cfg, key))


def _safe_train(cfg, x, y, key):
    try:
        return train_one(cfg, x, y, key)
    except ae.TrainingDivergedError as e:
        return e


def _per_variation(estimates, vs):
    """Pooled RMSE and the std of per-variation RMSEs."""
    mse = np.array([np.mean(np.abs(e - v.record.clean) ** 2) for e, v in zip(estimates, vs)])
    return float(np.sqrt(mse.mean())), float(np.sqrt(mse).std())


def _rmse_job(args):
    """Train and score every set size for one receiver and a tuple of SNRs.

    A tuple of several SNRs means one network shared across them, trained on
    their pooled variations.
    """
    cfg, ri, snrs = args
    r = cfg.rmse
    rx = r.receivers[ri]
    n_max = max(r.train_variations)
    gens = [ContextGenerator(cfg.scene, context_for(cfg, snr), cfg.seed) for snr in snrs]
    train = [g.dataset(TRAIN_STREAM, n_max, rx)[:2] for g in gens]
    tests = []
    for g in gens:
        xt, yt, vs = g.dataset(TEST_STREAM, r.test_variations, rx)
        base = {
            "raw": _per_variation([v.record.samples for v in vs], vs),
            "nsp": _per_variation([v.projected for v in vs], vs),
            "oracle": _per_variation([known_channel_oracle(v.record.samples, v.terms, v.noise_var) for v in vs], vs),
        }
        tests.append((xt, vs, base))
    rows, results = [], {}
    for n in r.train_variations:
        x = np.concatenate([d[0][:n] for d in train])
        y = np.concatenate([d[1][:n] for d in train])
        # network seeds depend on the receiver only, so cells are matched across SNR and set size
        res = _safe_train(cfg, x, y, (ri,))
        for snr, (xt, vs, base) in zip(snrs, tests):
            results[rx, snr, n] = res
            head = [rx, snr, n]
            tail = [base[k][j] for k in ("nsp", "oracle", "raw") for j in (0, 1)] + [len(vs)]
            if isinstance(res, Exception):
                rows.append(head + [float("nan")] * 2 + tail + [-1, 0, f"failed: {res}"])
                continue
            shape = vs[0].record.samples.shape
            est = [ae.devectorize(e, *shape) for e in ae.forward(res.net, xt)]
            rows.append(head + list(_per_variation(est, vs)) + tail
                        + [res.best_epoch, len(res.train_loss), "ok"])
    return rows, results


def rmse_jobs(cfg):
    r = cfg.rmse
    if r.shared_network:
        return [(cfg, ri, tuple(r.snr_db)) for ri in range(len(r.receivers))]
    return [(cfg, ri, (snr,)) for ri in range(len(r.receivers)) for snr in r.snr_db]


def train_networks(cfg, workers=1):
    """Train every (receiver, snr, set size) cell; returns ``{cell: TrainResult or error}``."""
    out = {}
    for _, res in _map(_rmse_job, rmse_jobs(cfg), workers):
        out.update(res)
    return out


def run_rmse_sweep(cfg, workers=1):
    r = cfg.rmse
    rows = [row for part, _ in _map(_rmse_job, rmse_jobs(cfg), workers) for row in part]
    order = {(rx, snr, n): k for k, (rx, snr, n) in enumerate(
        (rx, snr, n) for rx in r.receivers for n in r.train_variations for snr in r.snr_db)}
    rows.sort(key=lambda row: order[row[0], row[1], row[2]])
    meta = {
        "table": "RMSE of the recovered desired component against the clean record, pooled over test variations",
        "std": "population std of the per-variation RMSE",
        "snr": "desired-signal receive power per antenna over noise power at the receiver under test",
        "oracle": "known-channel LMMSE floor: every channel and the radar waveform known",
        "null_projection": "interferer projected onto the null space of its cross channel",
        "shared_network": r.shared_network,
        "sir_db": r.sir_db,
        "seed": cfg.seed,
    }
    return RMSE_COLUMNS, rows, meta
