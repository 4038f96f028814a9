"""Render CV results as markdown or comma-delimited documents.

Scores are printed with four decimals, rounding half up on the shortest
decimal representation of the float (so ``0.97005`` becomes ``0.9701``).
"""

from __future__ import annotations

from decimal import ROUND_HALF_UP, Decimal

from .evaluation import CvReport
from .pipeline import TablesBundle

FORMATS = ("markdown", "delimited")
PM = "±"


def fmt(x: float) -> str:
    return str(Decimal(repr(float(x))).quantize(Decimal("0.0001"), rounding=ROUND_HALF_UP))


def fmt_pm(mean: float, std: float) -> str:
    return f"{fmt(mean)}{PM}{fmt(std)}"


def summary_line(report: CvReport) -> str:
    return fmt_pm(report.mean, report.std)


def _md_table(header: list[str], rows: list[list[str]]) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(r) + " |" for r in rows]
    return "\n".join(lines) + "\n"


def _csv_table(header: list[str], rows: list[list[str]]) -> str:
    return "\n".join(",".join(r) for r in [header, *rows]) + "\n"


def _config_text(config: dict) -> str:
    return ", ".join(f"{k}={config[k]}" for k in config)


def cv_report_document(report: CvReport, fmt_name: str = "markdown") -> str:
    rows = [[str(i + 1), fmt(s)] for i, s in enumerate(report.per_fold_scores)]
    if fmt_name == "delimited":
        rows += [["mean", fmt(report.mean)], ["std", fmt(report.std)], ["summary", summary_line(report)]]
        return _csv_table(["fold", "score"], rows)
    out = ["# Cross-validation report", "", f"Configuration: {_config_text(report.config)}", ""]
    out.append(_md_table(["fold", "balanced accuracy"], rows))
    out.append(f"Mean{PM}std: {summary_line(report)}")
    return "\n".join(out) + "\n"


def emit_report(report: CvReport | TablesBundle, fmt_name: str = "markdown") -> dict[str, str]:
    """Map of file name to document text; identical input gives identical output."""
    if fmt_name not in FORMATS:
        raise ValueError(f"unknown format {fmt_name!r}")
    ext = "md" if fmt_name == "markdown" else "csv"
    if isinstance(report, CvReport):
        return {f"cv_report.{ext}": cv_report_document(report, fmt_name)}
    return {f"{name}.{ext}": text for name, text in _tables_documents(report, fmt_name).items()}


_FEATURE_SLUG = {"Original features": "original", "PCA features": "pca", "LDA features": "lda"}


def _tables_documents(bundle: TablesBundle, fmt_name: str) -> dict[str, str]:
    table = _md_table if fmt_name == "markdown" else _csv_table
    docs = {}

    header = ["Classifier", *bundle.feature_labels]
    rows = [
        [clf, *(summary_line(bundle.origin_table[(feat, clf)]) for feat in bundle.feature_labels)]
        for clf in bundle.classifier_labels
    ]
    title = "# Botanical origin identification: balanced accuracy (mean±std over folds)\n\n"
    docs["origin_table"] = (title if fmt_name == "markdown" else "") + table(header, rows)

    for feat in bundle.feature_labels:
        adul = bundle.adulteration_tables[feat]
        header = ["Botanical origin", *adul.classifiers]
        rows = [[o, *(summary_line(adul.rows[o][c]) for c in adul.classifiers)] for o in adul.rows]
        if adul.rows:
            rows.append(["Average", *(fmt_pm(*adul.average(c)) for c in adul.classifiers)])
        text = table(header, rows)
        if fmt_name == "markdown":
            text = f"# Adulteration detection per origin, {feat}\n\n" + text
            if adul.skipped:
                text += f"\nSkipped (single adulteration level): {', '.join(adul.skipped)}\n"
        docs[f"adulteration_{_FEATURE_SLUG.get(feat, feat)}"] = text

    header = ["Target", "Balanced accuracy"]
    rows = [[name, summary_line(r)] for name, r in bundle.end_to_end.items()]
    text = table(header, rows)
    if fmt_name == "markdown":
        text = "# End-to-end (stage 2 routed by predicted origin)\n\n" + text
    docs["end_to_end"] = text

    if bundle.sweep:
        labels = list(bundle.sweep)
        dims = [d for d, _ in bundle.sweep[labels[0]]]
        header = ["LDA components", *labels]
        rows = [[str(d), *(summary_line(dict(bundle.sweep[l])[d]) for l in labels)] for d in dims]
        text = table(header, rows)
        if fmt_name == "markdown":
            text = "# Origin accuracy versus number of LDA components\n\n" + text
        docs["lda_sweep"] = text
    return docs
