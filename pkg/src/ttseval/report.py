"""Report assembly and markdown rendering.

The JSON report is the source of truth; :func:`render_markdown` only reads
the report dict, so both views always carry the same numbers.
"""

from datetime import datetime, timezone
import hashlib
import json
from pathlib import Path

from . import __version__
from .errors import IoFailure
from .metrics import summarize

SCHEMA_VERSION = 1
DECIMALS = {"mcd": 2, "f0_rmse": 3}
NA = "N/A"


def utc_now():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def config_hash(config_dict):
    blob = json.dumps(config_dict, sort_keys=True, separators=(",", ":"))
    return "sha256:" + hashlib.sha256(blob.encode("utf-8")).hexdigest()


def new_report(command, config_dict=None, **fields):
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "provenance": {
            "toolkit_version": __version__,
            "config_hash": config_hash(config_dict) if config_dict is not None else None,
            "started_at": utc_now(),
            "finished_at": None,
        },
    }
    if config_dict is not None:
        report["config"] = config_dict
    report.update(fields)
    return report


def finish(report, records):
    report["records"] = records
    report["status"] = "errors" if has_errors(report) else "ok"
    report["provenance"]["finished_at"] = utc_now()
    return report


def has_errors(report):
    return bool(report.get("missing_in_gen")) or any(r["errors"] for r in report.get("records", []))


def metric_aggregate(records, key, unit):
    values = [r[key] for r in records if r.get(key) is not None]
    return summarize(values, unit).to_dict() if values else None


def pooled_cer(records):
    counted = [r["cer_counts"] for r in records if r.get("cer_counts")]
    if not counted:
        return None
    errors = sum(c["substitutions"] + c["deletions"] + c["insertions"] for c in counted)
    chars = sum(c["ref_length"] for c in counted)
    return {"errors": errors, "ref_chars": chars, "rate": errors / chars, "count": len(counted)}


def fmt_summary(agg, decimals):
    if agg is None:
        return NA
    return f"{agg['mean']:.{decimals}f} ± {agg['std']:.{decimals}f}"


def fmt_percent(rate):
    return NA if rate is None else f"{100.0 * rate:.1f}"


def fmt_value(value, decimals):
    return NA if value is None else f"{value:.{decimals}f}"


def _table(header, rows):
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(str(c) for c in row) + " |" for row in rows]
    return "\n".join(lines)


def _errors_cell(rec):
    return "; ".join(e.replace("|", "\\|") for e in rec["errors"]) or ""


def _render_eval(r):
    agg = r["aggregates"]
    cer_agg = agg.get("cer")
    out = [
        f"# Objective evaluation: {r['system']}",
        "",
        _table(
            ["Method", "MCD ± STD", "F0 RMSE ± STD", "CER"],
            [[
                r["system"],
                fmt_summary(agg.get("mcd"), DECIMALS["mcd"]),
                fmt_summary(agg.get("f0_rmse"), DECIMALS["f0_rmse"]),
                fmt_percent(cer_agg["rate"] if cer_agg else None),
            ]],
        ),
        "",
        "## Per-utterance",
        "",
        _table(
            ["ID", "MCD [dB]", "F0 RMSE", "CER [%]", "Errors"],
            [[
                rec["id"],
                fmt_value(rec["mcd"], DECIMALS["mcd"]),
                fmt_value(rec["f0_rmse"], DECIMALS["f0_rmse"]),
                fmt_percent(rec["cer"]),
                _errors_cell(rec),
            ] for rec in r["records"]],
        ),
    ]
    return out


def _render_cer(r):
    cer_agg = r["aggregates"].get("cer")
    return [
        f"# Character error rate: {r['system']}",
        "",
        _table(["Method", "CER"], [[r["system"], fmt_percent(cer_agg["rate"] if cer_agg else None)]]),
        "",
        "## Per-utterance",
        "",
        _table(
            ["ID", "S", "D", "I", "N", "CER [%]", "Errors"],
            [[
                rec["id"],
                *(
                    [rec["cer_counts"][k] for k in ("substitutions", "deletions", "insertions", "ref_length")]
                    if rec["cer_counts"] else [NA] * 4
                ),
                fmt_percent(rec["cer"]),
                _errors_cell(rec),
            ] for rec in r["records"]],
        ),
    ]


def _render_mos(r):
    rows = []
    for rec in r["records"]:
        mos = rec["mos"]
        cell = NA if mos is None else f"{mos['mean']:.2f} ± {mos['ci95']:.2f}"
        rows.append([rec["id"], cell, NA if mos is None else mos["n"], _errors_cell(rec)])
    return ["# Mean opinion scores", "", _table(["System", "MOS ± CI", "N", "Errors"], rows)]


def _render_files(r, title):
    rows = [[rec["id"], rec.get("path") or NA, _errors_cell(rec)] for rec in r["records"]]
    return [f"# {title}", "", _table(["ID", "Output", "Errors"], rows)]


def render_markdown(report):
    cmd = report["command"]
    if cmd == "eval":
        lines = _render_eval(report)
    elif cmd == "cer":
        lines = _render_cer(report)
    elif cmd == "mos":
        lines = _render_mos(report)
    elif cmd == "feats":
        lines = _render_files(report, "Feature extraction")
    elif cmd == "vocode":
        lines = _render_files(report, "Griffin-Lim vocoding")
    else:
        raise ValueError(f"unknown report command {cmd!r}")
    missing = report.get("missing_in_gen") or []
    extra = report.get("missing_in_ref") or []
    if missing:
        lines += ["", f"Missing generated utterances ({len(missing)}): " + ", ".join(missing)]
    if extra:
        lines += ["", f"Generated utterances without reference ({len(extra)}): " + ", ".join(extra)]
    lines += ["", f"Status: {report['status']}", ""]
    return "\n".join(lines)


def write_report(report, out_dir, stem="report"):
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{stem}.json").write_text(json.dumps(report, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
        (out / f"{stem}.md").write_text(render_markdown(report), encoding="utf-8")
    except OSError as e:
        raise IoFailure(f"cannot write report to {out}: {e}") from e
