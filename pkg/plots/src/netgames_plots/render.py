"""Render figure-style images from netgames bench CSV files.

Reads only the documented CSV schema (rows:
experiment,family,N,trial,seed,metric,value / summary:
experiment,family,N,metric,mean,std,count); never recomputes a metric and
never modifies an input. Output images are deterministic for identical
inputs and options.
"""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

ROW_COLUMNS = ["experiment", "family", "N", "trial", "seed", "metric", "value"]
SUMMARY_COLUMNS = ["experiment", "family", "N", "metric", "mean", "std", "count"]
FIGURES = ("fig2", "fig3", "fig4")

_PNG_METADATA = {"Software": "netgames-plots"}
_PHI_METRIC = re.compile(r"^phi\[(\d+)\]$")


class SchemaError(ValueError):
    """The CSV does not carry the documented columns."""


class EmptyDataError(ValueError):
    """The CSV carries no rows usable for the requested figure."""


@dataclass(frozen=True)
class PlotJob:
    figure: str                    # fig2 | fig3 | fig4
    out_path: str
    summary_path: str | None = None
    rows_path: str | None = None
    log_y: bool = True             # fig2 only

    def __post_init__(self):
        if self.figure not in FIGURES:
            raise SchemaError(f"unknown figure id {self.figure!r}; "
                              f"expected one of {', '.join(FIGURES)}")
        needs_rows = self.figure == "fig4"
        if needs_rows and self.rows_path is None:
            raise SchemaError("fig4 needs the raw rows CSV (--rows)")
        if not needs_rows and self.summary_path is None:
            raise SchemaError(f"{self.figure} needs the summary CSV (--summary)")


def _read_csv(path, required):
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in required if c not in header]
        if missing:
            raise SchemaError(f"{path} is missing columns: {', '.join(missing)}")
        return list(reader)


def _panel_grid(count, panel_size=(3.2, 2.6)):
    ncols = min(3, max(count, 1))
    nrows = max(1, math.ceil(count / ncols))
    fig, axes = plt.subplots(nrows, ncols, squeeze=False,
                             figsize=(panel_size[0] * ncols, panel_size[1] * nrows))
    return fig, [ax for row in axes for ax in row]


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=_PNG_METADATA)
    plt.close(fig)


def _render_fig2(job: PlotJob) -> None:
    records = _read_csv(job.summary_path, SUMMARY_COLUMNS)
    series = {}
    for rec in records:
        if rec["metric"] not in ("asym_inf", "norm2", "norm_inf"):
            continue
        key = (rec["family"], rec["metric"])
        series.setdefault(key, []).append((int(rec["N"]), float(rec["mean"])))
    families = sorted({fam for fam, _ in series})
    if not families:
        raise EmptyDataError(f"{job.summary_path} has no network metric rows")
    fig, axes = _panel_grid(len(families))
    labels = {"asym_inf": "asymmetry norm", "norm2": "2-norm",
              "norm_inf": "inf-norm"}
    for ax, family in zip(axes, families):
        for metric, style in (("asym_inf", "o-"), ("norm2", "s--"),
                              ("norm_inf", "^:")):
            points = sorted(series.get((family, metric), []))
            if points:
                ax.plot([n for n, _ in points], [v for _, v in points], style,
                        label=labels[metric], markersize=3)
        ax.set_title(family, fontsize=9)
        ax.set_xlabel("players")
        ax.set_xscale("log")
        if job.log_y:
            ax.set_yscale("log")
        ax.tick_params(labelsize=7)
    for ax in axes[len(families):]:
        ax.axis("off")
    axes[0].legend(fontsize=7)
    _save(fig, job.out_path)


def _render_fig3(job: PlotJob) -> None:
    records = _read_csv(job.summary_path, SUMMARY_COLUMNS)
    series = {}
    for rec in records:
        if rec["metric"] not in ("pos_lambda", "pos_G", "pos_gamma"):
            continue
        key = (rec["family"], rec["metric"])
        series.setdefault(key, []).append((int(rec["N"]), float(rec["mean"])))
    families = sorted({fam for fam, _ in series})
    if not families:
        raise EmptyDataError(f"{job.summary_path} has no suboptimality bound rows")
    fig, axes = _panel_grid(len(families))
    labels = {"pos_lambda": "eigenvalue bound", "pos_G": "entry bound",
              "pos_gamma": "coupling bound"}
    for ax, family in zip(axes, families):
        for metric, style in (("pos_lambda", "o-"), ("pos_G", "s--"),
                              ("pos_gamma", "^:")):
            points = sorted(series.get((family, metric), []))
            if points:
                ax.plot([n for n, _ in points], [v for _, v in points], style,
                        label=labels[metric], markersize=3)
        ax.set_title(family, fontsize=9)
        ax.set_xlabel("players")
        ax.set_ylabel("welfare suboptimality bound")
        ax.tick_params(labelsize=7)
    for ax in axes[len(families):]:
        ax.axis("off")
    axes[0].legend(fontsize=7)
    _save(fig, job.out_path)


def _render_fig4(job: PlotJob) -> None:
    records = _read_csv(job.rows_path, ROW_COLUMNS)
    traces = {}
    for rec in records:
        match = _PHI_METRIC.match(rec["metric"])
        if not match:
            continue
        key = (rec["family"], int(rec["trial"]))
        traces.setdefault(key, []).append((int(match.group(1)),
                                           float(rec["value"])))
    if not traces:
        raise EmptyDataError(f"{job.rows_path} has no potential trace rows")
    keys = sorted(traces)
    fig, axes = _panel_grid(len(keys))
    for ax, key in zip(axes, keys):
        points = sorted(traces[key])
        ax.plot([k for k, _ in points], [v for _, v in points], "-", lw=1.0)
        ax.set_title(f"{key[0]}, trial {key[1]}", fontsize=9)
        ax.set_xlabel("iteration")
        ax.set_ylabel("potential")
        ax.tick_params(labelsize=7)
    for ax in axes[len(keys):]:
        ax.axis("off")
    _save(fig, job.out_path)


_RENDERERS = {"fig2": _render_fig2, "fig3": _render_fig3, "fig4": _render_fig4}


def render(job: PlotJob) -> str:
    """Render one figure; returns the output path."""
    _RENDERERS[job.figure](job)
    return job.out_path
