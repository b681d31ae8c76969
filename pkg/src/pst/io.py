"""Deterministic CSV serialization for experiment outputs."""

import csv
import math

__all__ = ["format_value", "parse_value", "write_csv", "read_csv", "write_trace_csv"]


def format_value(v):
    """Integers verbatim, floats with 17 significant digits."""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return format(v, ".17g")
    try:
        import numpy as np

        if isinstance(v, np.integer):
            return str(int(v))
        if isinstance(v, np.floating):
            return format_value(float(v))
    except ImportError:  # pragma: no cover
        pass
    return str(v)


def parse_value(s):
    for kind in (int, float):
        try:
            return kind(s)
        except ValueError:
            pass
    return s


def write_csv(path, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_value(v) for v in row])


def read_csv(path):
    """Return ``(header, rows)`` with numeric fields parsed."""
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        rows = [[parse_value(v) for v in row] for row in reader]
    return header, rows


def write_trace_csv(trace, path):
    """One run's iteration trace: iteration, se, norm_err, cumulative_seconds."""
    write_csv(
        path,
        ["iteration", "se", "norm_err", "cumulative_seconds"],
        [(e.iteration, e.se, e.norm_err, e.seconds) for e in trace],
    )
