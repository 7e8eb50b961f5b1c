import csv
import pathlib
import typing as t

import msgspec
import numpy as np

PathLike = str | pathlib.Path


class MetricSummary(msgspec.Struct, frozen=True):
    mean: float
    std: float
    values: list[float]

    @classmethod
    def of(cls, values: t.Sequence[float]) -> t.Self:
        array = np.asarray(values, dtype=np.float64)
        return cls(mean=float(array.mean()), std=float(array.std()), values=list(values))


class PrecisionPoint(msgspec.Struct, frozen=True):
    k: int
    summary: MetricSummary


class EvalReport(msgspec.Struct, frozen=True):
    precision_at_k: list[PrecisionPoint]
    map: MetricSummary
    repeats: int
    """Repeats that completed"""
    failures: list[str]
    split_fingerprints: list[str]


class ReportRow(msgspec.Struct, frozen=True):
    group: str
    metric: str
    mean: float
    std: float
    repeats: int


def report_rows(group: str, report: EvalReport) -> list[ReportRow]:
    """One row per metric: MAP, then every precision@k."""
    rows = [ReportRow(group, "map", report.map.mean, report.map.std, report.repeats)]
    rows.extend(
        ReportRow(group, f"p@{point.k}", point.summary.mean, point.summary.std, report.repeats)
        for point in report.precision_at_k
    )
    return rows


def write_table_csv(
    path: PathLike, header: t.Sequence[str], rows: t.Iterable[t.Sequence[t.Any]]
) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([f"{x:.17g}" if isinstance(x, float) else x for x in row])


def write_report_csv(path: PathLike, rows: t.Iterable[ReportRow]) -> None:
    write_table_csv(
        path,
        ("group", "metric", "mean", "std", "repeats"),
        ((r.group, r.metric, r.mean, r.std, r.repeats) for r in rows),
    )


def format_table(header: t.Sequence[str], rows: t.Iterable[t.Sequence[t.Any]]) -> str:
    """Plain fixed-width text table."""
    cells = [[str(h) for h in header]] + [
        [f"{x:.4f}" if isinstance(x, float) else str(x) for x in row] for row in rows
    ]
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)) for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)
