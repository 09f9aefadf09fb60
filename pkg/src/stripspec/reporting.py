"""Report serialization: CSV/JSON alongside matplotlib SVG figures.

CSV and JSON are byte-deterministic for identical inputs: fixed column
order, fixed float formatting, insertion-ordered JSON.  Figures are
rendered with a fixed svg hashsalt and no date metadata, so reruns
produce identical SVG as well.
"""

from __future__ import annotations

import json
import math

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .analysis import SweepReport

__all__ = ["write_report_csv", "write_report_json", "plot_report", "SCHEMA_VERSION"]

SCHEMA_VERSION = 1


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    return str(value)


def _columns(records) -> list:
    cols = []
    for rec in records:
        for key in rec:
            if key not in cols:
                cols.append(key)
    return cols


def write_report_csv(report: SweepReport, path) -> None:
    cols = _columns(report.records)
    lines = [",".join(cols)]
    for rec in report.records:
        lines.append(",".join(_fmt(rec[c]) if c in rec else "" for c in cols))
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    return obj


def write_report_json(report: SweepReport, path) -> None:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "scenario": report.scenario,
        "theorem": report.theorem,
        "criterion": report.criterion,
        "verdict": bool(report.verdict),
        "fit": _jsonable(report.fit),
        "extras": _jsonable(report.extras),
        "records": _jsonable(report.records),
    }
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _loglog_panel(ax, report, y_key, label):
    eps = [r["epsilon"] for r in report.records if y_key in r]
    val = [abs(r[y_key]) for r in report.records if y_key in r]
    ax.loglog(eps, val, "o-", label=label)
    if report.fit:
        e = np.array(sorted(eps))
        lv = np.log(val[0]) + report.fit["exponent"] * (np.log(e) - math.log(eps[0]))
        ax.loglog(e, np.exp(lv), "k--",
                  label=f"slope {report.fit['exponent']:.2f}")
    ax.set_xlabel("epsilon")
    ax.set_ylabel(label)
    ax.legend(loc="best", fontsize=8)


def plot_report(report: SweepReport, path) -> None:
    """Render the sweep's headline quantity; one SVG per report."""
    matplotlib.rcParams["svg.hashsalt"] = report.scenario
    fig, ax = plt.subplots(figsize=(5.0, 3.6), dpi=110)
    tag = report.theorem
    try:
        if tag == "T1":
            ns = [r["n_s"] for r in report.records]
            err = [r["abs_error"] for r in report.records]
            ax.loglog(ns, err, "o-", label="|lambda1 - reference|")
            ax.loglog(ns, [err[0] * (ns[0] / n) ** 2 for n in ns], "k--",
                      label="order 2")
            ax.set_xlabel("n_s")
            ax.set_ylabel("error")
            ax.legend(fontsize=8)
        elif tag in ("T5", "T6"):
            _loglog_panel(ax, report, "remainder", "|remainder|")
        elif tag == "T7":
            _loglog_panel(ax, report, "gap_norm", "resolvent gap norm")
        elif tag == "T8":
            eps = [r["epsilon"] for r in report.records if "quantity" in r]
            q = [r["quantity"] for r in report.records if "quantity" in r]
            ax.semilogx(eps, q, "o-", label="eps*(lambda1 - threshold)")
            ref = report.extras.get("lambda_eff_ref")
            if ref is not None:
                ax.axhline(ref, color="k", ls="--", label="effective lambda1")
            ax.set_xlabel("epsilon")
            ax.legend(fontsize=8)
        elif tag == "T2":
            gaps = report.extras.get("trial_gaps") or {}
            if gaps:
                ns = sorted(float(k) for k in gaps)
                ax.semilogx(ns, [gaps[n] for n in ns], "o-",
                            label="trial quotient gap")
                ax.axhline(0.0, color="k", lw=0.8)
                lim = report.extras.get("trial_limit")
                if lim is not None:
                    ax.axhline(lim, color="r", ls="--", label="limit integral")
                ax.set_xlabel("cutoff n")
                ax.legend(fontsize=8)
            else:
                _bar_lambda(ax, report)
        elif tag in ("T3", "T4"):
            ls = [r["half_length"] for r in report.records]
            cs = [r["hardy_c"] for r in report.records]
            ax.plot(ls, cs, "o-", label="hardy constant")
            ax.axhline(0.0, color="k", lw=0.8)
            ax.set_xlabel("half length L")
            ax.legend(fontsize=8)
        elif tag == "LA1":
            idx = [r["instance"] for r in report.records]
            ax.plot(idx, [r["bound_violation"] for r in report.records], ".",
                    label="bound violation")
            ax.plot(idx, [r["monotonicity_violation"] for r in report.records],
                    ".", label="monotonicity violation")
            ax.set_xlabel("instance")
            ax.legend(fontsize=8)
        elif tag == "TA2":
            mu = [r["mu"] for r in report.records]
            v = [r["lambda1_over_mu"] for r in report.records]
            ax.semilogx(mu, v, "o-", label="lambda1/mu")
            ax.axhline(-1.0, color="k", ls="--", label="inf V")
            ax.set_xlabel("mu")
            ax.legend(fontsize=8)
        else:
            _bar_lambda(ax, report)
        ax.set_title(f"{report.scenario} [{tag}] "
                     f"{'PASS' if report.verdict else 'FAIL'}", fontsize=9)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
    finally:
        plt.close(fig)


def _bar_lambda(ax, report):
    vals = [r.get("lambda1") for r in report.records if "lambda1" in r]
    ax.plot(range(len(vals)), vals, "o-", label="lambda1 per setting")
    ax.set_xlabel("setting")
    ax.legend(fontsize=8)
