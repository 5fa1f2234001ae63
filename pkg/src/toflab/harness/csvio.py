"""CSV output for trial records.

Column order is fixed: ``trial, method, eps_<node>..., true_s, estimate_s,
error_s, error_m, bound_m``. Floats are written with ``repr`` so they parse
back to the identical double.
"""

from __future__ import annotations

import csv
from collections.abc import Iterable, Sequence
from typing import IO

from .montecarlo import TrialRecord

TAIL_COLUMNS = ("true_s", "estimate_s", "error_s", "error_m", "bound_m")


def header(node_ids: Sequence[str]) -> list[str]:
    return ["trial", "method", *(f"eps_{nid}" for nid in node_ids), *TAIL_COLUMNS]


def emit_csv(
    records: Iterable[TrialRecord],
    sink: IO[str],
    node_ids: Sequence[str] | None = None,
    comment: str | None = None,
) -> None:
    """Write ``records`` to ``sink``; an optional ``# comment`` line goes first."""
    records = list(records)
    if node_ids is None:
        node_ids = list(records[0].drifts_ppm) if records else []
    if comment is not None:
        sink.write(f"# {comment}\r\n")
    writer = csv.writer(sink)
    writer.writerow(header(node_ids))
    for r in records:
        writer.writerow(
            [
                r.trial,
                r.method,
                *(repr(float(r.drifts_ppm[nid])) for nid in node_ids),
                *(repr(float(getattr(r, col))) for col in TAIL_COLUMNS),
            ]
        )


def read_csv(source: IO[str]) -> list[dict[str, str]]:
    """Parse emitted CSV back into row dicts, skipping ``#`` comment lines."""
    lines = (line for line in source if not line.startswith("#"))
    return list(csv.DictReader(lines))
