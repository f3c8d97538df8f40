"""CSV emission for sweep rows (RFC 4180 quoting, CRLF line ends)."""

import csv
import io
from typing import Any, Dict, Iterable

CSV_HEADER = (
    "scenario",
    "policy",
    "seed",
    "snr_db",
    "offered_kbps",
    "station",
    "throughput_kbps",
    "delay_mean_ms",
    "delay_p95_ms",
    "packet_jitter_ms",
    "frame_jitter_ms",
    "frame_rate_fps",
    "loss_ratio",
    "psnr_db",
    "handoffs",
)


def format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return format(value, ".6g")
    return str(value)


def emit_csv(rows: Iterable[Dict[str, Any]]) -> str:
    """Header plus one line per row, in the order given."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        missing = [column for column in CSV_HEADER if column not in row]
        if missing:
            raise KeyError(f"row is missing columns: {', '.join(missing)}")
        writer.writerow([format_value(row[column]) for column in CSV_HEADER])
    return buffer.getvalue()
