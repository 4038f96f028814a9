"""Matplotlib figures written next to the text reports.

Figures are built on the object API with an Agg canvas (no pyplot state),
and PNG metadata is stripped so repeated runs produce identical bytes.
"""

from __future__ import annotations

import pathlib

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .pipeline import TablesBundle

_PNG_META = {"Software": None}


def _new_figure(width: float = 6.4, height: float = 4.0) -> Figure:
    fig = Figure(figsize=(width, height), dpi=100)
    FigureCanvasAgg(fig)
    return fig


def _save(fig: Figure, path: pathlib.Path) -> pathlib.Path:
    fig.tight_layout()
    fig.savefig(path, format="png", metadata=_PNG_META)
    return path


def _grouped_bars(ax, groups: list[str], series: dict[str, list[float]], errors: dict[str, list[float]]):
    x = np.arange(len(groups))
    width = 0.8 / max(1, len(series))
    for i, (name, vals) in enumerate(series.items()):
        ax.bar(x + (i - (len(series) - 1) / 2) * width, vals, width, yerr=errors[name], capsize=3, label=name)
    ax.set_xticks(x)
    ax.set_xticklabels(groups)
    ax.set_ylabel("Balanced accuracy")
    ax.set_ylim(0.0, 1.05)
    ax.legend(loc="lower right", fontsize="small")


def origin_figure(bundle: TablesBundle, path: pathlib.Path) -> pathlib.Path:
    fig = _new_figure()
    ax = fig.add_subplot(111)
    series = {c: [bundle.origin_table[(f, c)].mean for f in bundle.feature_labels] for c in bundle.classifier_labels}
    errors = {c: [bundle.origin_table[(f, c)].std for f in bundle.feature_labels] for c in bundle.classifier_labels}
    _grouped_bars(ax, list(bundle.feature_labels), series, errors)
    ax.set_title("Botanical origin identification")
    return _save(fig, path)


def adulteration_figure(bundle: TablesBundle, path: pathlib.Path) -> pathlib.Path:
    fig = _new_figure()
    ax = fig.add_subplot(111)
    series, errors = {}, {}
    for c in bundle.classifier_labels:
        avgs = [bundle.adulteration_tables[f].average(c) if bundle.adulteration_tables[f].rows else (0.0, 0.0)
                for f in bundle.feature_labels]
        series[c] = [a for a, _ in avgs]
        errors[c] = [s for _, s in avgs]
    _grouped_bars(ax, list(bundle.feature_labels), series, errors)
    ax.set_title("Adulteration detection (average over origins)")
    return _save(fig, path)


def sweep_figure(bundle: TablesBundle, path: pathlib.Path) -> pathlib.Path:
    fig = _new_figure()
    ax = fig.add_subplot(111)
    for label, points in bundle.sweep.items():
        ax.plot([d for d, _ in points], [r.mean for _, r in points], marker="o", label=label)
    ax.set_xlabel("Number of LDA components")
    ax.set_ylabel("Balanced accuracy")
    ax.legend(loc="lower right", fontsize="small")
    ax.grid(alpha=0.3)
    return _save(fig, path)


def tables_figures(bundle: TablesBundle, out_dir: pathlib.Path) -> list[pathlib.Path]:
    out_dir = pathlib.Path(out_dir)
    paths = [
        origin_figure(bundle, out_dir / "origin_accuracy.png"),
        adulteration_figure(bundle, out_dir / "adulteration_accuracy.png"),
    ]
    if bundle.sweep:
        paths.append(sweep_figure(bundle, out_dir / "lda_sweep.png"))
    return paths


def spectrum_figure(wavelengths, values, title: str, path: pathlib.Path) -> pathlib.Path:
    fig = _new_figure(6.4, 3.6)
    ax = fig.add_subplot(111)
    ax.plot(wavelengths, values, color="tab:orange")
    ax.set_xlabel("Wavelength (nm)")
    ax.set_ylabel("Reflectance")
    ax.set_title(title)
    return _save(fig, path)


def spectrum_plot_data(wavelengths, values) -> str:
    """Two tab-separated columns, wavelength then value."""
    lines = ["wavelength_nm\tvalue"]
    lines += [f"{repr(float(w))}\t{repr(float(v))}" for w, v in zip(wavelengths, values)]
    return "\n".join(lines) + "\n"
