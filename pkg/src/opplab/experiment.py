"""Run a validated config and persist manifest.json, results.csv, summary.json.

Output bytes depend only on (config, seed): floats are written with 17
significant digits, rationals as exact "p/q" strings, and anything
time-dependent lives in the manifest alone.
"""
from __future__ import annotations

import csv
import datetime as dt
import hashlib
import io
import json
import logging
import math
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig
from .errors import OpplabError, WorkerError
from .expansion import expand, reconstruct
from .oracle import YModel
from .rng import RngStreamKey
from .sampler import sample_batch, sample_trajectory
from .statistics import (LawSpec, RhoFamily, StatisticSeries, TriangularArray, WeightScheme,
                         as_convergence_diag, law_series, prob_convergence_diag, validate_weights)
from . import verify as vf

log = logging.getLogger(__name__)

EXIT_OK, EXIT_FAIL, EXIT_WORKER = 0, 1, 4
RESULTS, SUMMARY, MANIFEST = "results.csv", "summary.json", "manifest.json"


# serialisation -------------------------------------------------------------
def fmt(value) -> str:
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    return "" if value is None else str(value)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return fmt(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else fmt(v)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def dump_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_csv(rows: list, columns=None) -> str:
    if columns is None:
        columns = []
        for row in rows:
            columns.extend(k for k in row if k not in columns)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


# tasks -----------------------------------------------------------------------
def _task_expand(cfg: ExperimentConfig):
    t = cfg.task
    seq = expand(t["x"], t["scheme"], t.get("max_digits", 64))
    rows = [{"index": i + 1, "digit": d, "partial_sum": reconstruct(seq, i + 1)}
            for i, d in enumerate(seq.digits)]
    extra = {"digits.txt": "".join(f"{d}\n" for d in seq.digits)}
    summary = {"x": t["x"], "scheme": t["scheme"], "digits": list(seq.digits),
               "terminated": seq.terminated}
    return rows, summary, None, extra


def _task_sample(cfg: ExperimentConfig):
    t = cfg.task
    model = cfg.model()
    reps = t.get("replications", 1)
    n = t["n"]
    rows = []
    if t.get("mode", "exact") == "exact":
        for sid in range(reps):
            traj = sample_trajectory(model, n, RngStreamKey(cfg.seed, sid), "exact", t.get("v_bits", 64))
            for j, b in enumerate(traj.b):
                rows.append({"stream_id": sid, "j": j + 1, "B_j": b,
                             "R_j": traj.r[j] if j < len(traj.r) else None})
    else:
        batch = sample_batch(model, n, cfg.seed, np.arange(reps), t.get("v_bits", 64))
        for sid in range(reps):
            for j in range(n):
                rows.append({"stream_id": sid, "j": j + 1, "B_j": batch.b[sid, j],
                             "log_B_j": batch.log_b[sid, j],
                             "R_j": batch.r[sid, j] if j < n - 1 else None})
    return rows, {"model": model.to_dict(), "n": n, "replications": reps,
                  "mode": t.get("mode", "exact")}, None, {}


def _weights(t: dict, default_p=1.0) -> WeightScheme:
    w = dict(t.get("weights", {}))
    w.setdefault("p", t.get("p", default_p))
    return WeightScheme(**w)


def _task_verify(cfg: ExperimentConfig):
    t = cfg.task
    model = cfg.model()
    lemma, seed = t["lemma"], cfg.seed
    if lemma == "dominance":
        rep = vf.verify_dominance(model, t.get("x_grid", [1.5, 2, 5, 10, 50]), t.get("N", 10**5),
                                  seed, t.get("n", 1))
    elif lemma == "trunc-moments":
        rep = vf.verify_trunc_moments(model, t.get("q_grid", [0.5, 1, "alpha", 2]),
                                      t.get("t_grid", [1, 2, 10, 1000]), t.get("N"), seed, t.get("n", 1))
    elif lemma == "tail-sum":
        rep = vf.verify_tail_sum(model, _weights(t), t.get("alpha", model.alpha_meta or 1.0),
                                 t.get("n_grid", [100, 1000, 10000]), t.get("N"), seed)
    elif lemma == "moment-bound":
        rep = vf.verify_moment_bound(model, _weights(t, t.get("p", 2.0)), t.get("p", 2.0),
                                     t.get("l_prime", 1.1), t.get("n_grid", [1000, 10000]),
                                     t.get("N", 10**5), seed)
    elif lemma == "second-moment":
        rep = vf.verify_second_moment(model, _weights(t), t.get("alpha", model.alpha_meta or 1.0),
                                      t.get("n_grid", [100, 300, 1000, 3000]), t.get("N", 1000), seed)
    else:
        grid = [tuple(p) for p in t.get("ij_grid", [[i, j] for i in (2, 5, 10, 50, 100)
                                                     for j in (2, 5, 10, 50, 100) if i <= j])]
        rep = vf.verify_cov_bound(model, grid, t.get("N", 10**5), seed, t.get("p", 2.0),
                                  t.get("l_prime", 1.1))
    rows = [r.to_dict() for r in rep.rows]
    summary = {k: v for k, v in rep.to_dict().items() if k != "rows"}
    summary["rows"] = len(rows)
    summary["judged_rows"] = sum(1 for r in rep.rows if r.passed is not None)
    return rows, summary, rep.verdict, {}


def law_spec_from_task(t: dict, horizon: int) -> LawSpec:
    th = t["theorem"]
    if th == "thm5":
        return LawSpec("thm5", WeightScheme.theorem5(t.get("beta", 1.0), t.get("p", 2.0)),
                       beta=t.get("beta", 1.0), rho=RhoFamily(**t.get("rho", {})))
    if th == "thm4":
        return LawSpec("thm4", array=TriangularArray.from_dict(t["array"], horizon))
    return LawSpec(th, _weights(t))


def _task_law(cfg: ExperimentConfig):
    t = cfg.task
    model = cfg.model()
    n_grid = list(t["n_grid"])
    spec = law_spec_from_task(t, n_grid[-1])
    eps = tuple(t.get("eps", [0.1, 0.01]))
    alpha = model.alpha_meta or 1.0
    validation = None
    if n_grid[-1] >= 10**3:
        target = spec.array if spec.theorem == "thm4" else spec.weights
        validation = validate_weights(target, alpha, spec.theorem, n_grid[-1], y=YModel(model.family_at(2)),
                                      rho=spec.rho, beta=spec.beta)
    partial_error = None
    try:
        series = law_series(model, spec, n_grid, t["replications"], cfg.seed, eps,
                            mc_reps=t.get("mc_reps", 2000), workers=cfg.threads)
    except WorkerError as exc:
        series, partial_error = exc.partial, exc
    rows = law_rows(series, eps)
    summary = {
        "theorem": spec.theorem, "model": model.name, "n_grid": n_grid, "eps": list(eps),
        "replications": int(series.values.shape[0]), "centering": series.centering_provenance,
        "mode": "almost-sure" if spec.theorem == "thm5" else "probability",
        "median_statistic": [float(np.median(series.values[:, c])) if series.values.size else None
                             for c in range(len(n_grid))],
        "note": "trend tables are diagnostics, not verdicts",
    }
    if validation is not None:
        summary["hypotheses"] = {"passed": validation.passed, "note": validation.note,
                                 "conditions": [vars(c) for c in validation.conditions]}
    if partial_error is not None:
        raise _Partial(rows, summary, partial_error)
    return rows, summary, None, {}


def law_rows(series: StatisticSeries, eps) -> list:
    diag = as_convergence_diag if series.theorem_id == "thm5" else prob_convergence_diag
    return diag(series, eps)


class _Partial(Exception):
    def __init__(self, rows, summary, cause):
        super().__init__(str(cause))
        self.rows, self.summary, self.cause = rows, summary, cause


TASKS = {"expand": _task_expand, "sample": _task_sample, "verify": _task_verify, "law": _task_law}


# orchestration -------------------------------------------------------------
def run_experiment(config: dict | ExperimentConfig) -> tuple:
    """Run and persist; returns (output directory, exit code)."""
    cfg = config if isinstance(config, ExperimentConfig) else ExperimentConfig(config)
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    started = time.time()
    kind = cfg.task["kind"]
    partial, error, verdict = False, None, None
    try:
        rows, summary, verdict, extra = TASKS[kind](cfg)
    except _Partial as p:
        rows, summary, extra, partial, error = p.rows, p.summary, {}, True, repr(p.cause)
    except OpplabError:
        raise
    except Exception as exc:  # noqa: BLE001 - a crashed worker still leaves a manifest
        log.exception("task failed")
        rows, summary, extra, partial, error = [], {"task": kind}, {}, True, repr(exc)
    summary = {"task": kind, **summary, "verdict": verdict}
    if partial:
        summary["partial"] = True
    files = {RESULTS: write_csv(rows), SUMMARY: dump_json(summary), **extra}
    for name, text in files.items():
        (out / name).write_text(text, encoding="utf-8", newline="")
    code = EXIT_WORKER if partial else (EXIT_FAIL if verdict == "FAIL" else EXIT_OK)
    manifest = {
        "tool": "opplab", "version": __version__,
        "config": cfg.raw,
        "seeds": {kind: cfg.seed},
        "started": dt.datetime.fromtimestamp(started, dt.timezone.utc).isoformat(),
        "wall_clock_s": round(time.time() - started, 3),
        "files": {name: sha256(out / name) for name in sorted(files)},
        "partial": partial, "error": error, "exit_code": code, "verdict": verdict,
    }
    (out / MANIFEST).write_text(dump_json(manifest), encoding="utf-8")
    return out, code
