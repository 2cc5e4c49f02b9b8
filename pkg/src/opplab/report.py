"""Plain-text tables and gnuplot data files from an artifact directory."""
from __future__ import annotations

import csv
import json
from pathlib import Path

from .errors import ConfigurationError

EXIT_BAD_MANIFEST = 3


class ReportError(ConfigurationError):
    exit_code = EXIT_BAD_MANIFEST


def _load(artifact_dir: Path):
    try:
        manifest = json.loads((artifact_dir / "manifest.json").read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ReportError(f"{artifact_dir}: missing or corrupt manifest ({exc})") from exc
    if not isinstance(manifest, dict) or "config" not in manifest or "files" not in manifest:
        raise ReportError(f"{artifact_dir}: manifest lacks config/files")
    try:
        with open(artifact_dir / "results.csv", encoding="utf-8", newline="") as fh:
            rows = list(csv.DictReader(fh))
        summary = json.loads((artifact_dir / "summary.json").read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ReportError(f"{artifact_dir}: unreadable results ({exc})") from exc
    return manifest, rows, summary


def _table(header, rows) -> str:
    cells = [list(map(str, header))] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _short(v: str) -> str:
    try:
        return f"{float(v):.6g}"
    except ValueError:
        return v


def _write_dat(path: Path, pairs):
    path.write_text("".join(f"{x} {y}\n" for x, y in pairs), encoding="utf-8")


def render_report(artifact_dir) -> str:
    """Human-readable summary; also writes ``plots/*.dat`` two-column files."""
    artifact_dir = Path(artifact_dir)
    manifest, rows, summary = _load(artifact_dir)
    task = manifest["config"]["task"]
    plots = artifact_dir / "plots"
    plots.mkdir(exist_ok=True)
    out = []
    if manifest.get("partial"):
        out.append(f"PARTIAL run: {manifest.get('error')}")
    title = task["kind"] + (f" {task.get('lemma') or task.get('theorem') or ''}").rstrip()
    out.append(f"== {title} (seed {manifest['config'].get('seed')}) ==")
    kind = task["kind"]
    if kind == "verify" and task["lemma"] == "dominance":
        upper = [r for r in rows if r["label"] == "upper"]
        out.append(_table(["x", "p_hat", "upper", "margin", "se", "status"],
                          [[r["x"], _short(r["lhs"]), _short(r["rhs"]), _short(r["margin"]), _short(r["se"]),
                            r["status"]] for r in upper]))
        _write_dat(plots / "dominance_p_hat.dat", [(r["x"], r["lhs"]) for r in upper])
        _write_dat(plots / "dominance_upper.dat", [(r["x"], r["rhs"]) for r in upper])
    elif kind == "verify":
        keys = [k for k in rows[0] if k not in ("lhs", "rhs", "margin", "se", "kind", "status", "note")] if rows else []
        out.append(_table(keys + ["lhs", "rhs", "margin", "se", "status"],
                          [[r[k] for k in keys] + [_short(r[c]) for c in ("lhs", "rhs", "margin", "se")]
                           + [r["status"]] for r in rows]))
        _write_dat(plots / "margins.dat", [(i, r["margin"]) for i, r in enumerate(rows)])
    elif kind == "law":
        eps_levels = sorted({r["eps"] for r in rows}, key=float)
        for e in eps_levels:
            sel = [r for r in rows if r["eps"] == e]
            out.append(f"p_hat_n(eps = {_short(e)})")
            out.append(_table(["n", "p_hat", "ci_lo", "ci_hi"],
                              [[r["n"], _short(r["p_hat"]), _short(r["ci_lo"]), _short(r["ci_hi"])] for r in sel]))
            _write_dat(plots / f"p_hat_eps{_short(e)}.dat", [(r["n"], r["p_hat"]) for r in sel])
        hyp = summary.get("hypotheses")
        if hyp:
            out.append(f"hypotheses ({hyp['note']}): {'PASS' if hyp['passed'] else 'FAIL'}")
    elif kind == "expand":
        out.append(_table(["index", "digit"], [[r["index"], r["digit"]] for r in rows]))
        _write_dat(plots / "digits.dat", [(r["index"], r["digit"]) for r in rows])
    else:
        out.append(f"{len(rows)} rows; see results.csv")
    if summary.get("verdict"):
        out.append(f"verdict: {summary['verdict']}")
    return "\n".join(out) + "\n"
