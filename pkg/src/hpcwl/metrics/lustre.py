"""Parallel filesystem usage distributions and daily read/write balance.

Reads are bytes received by compute nodes (rx), writes are bytes transmitted
(tx).  Rates are job-duration averages, not instantaneous network rates.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date, timedelta
from typing import Mapping, Sequence

from ..ingest import JobRecord, utc_date
from ..perfsummary import JobPerfSummary
from .histograms import Histogram1D, log_edges

METRICS = ("file_opens", "bytes_read", "bytes_written", "read_rate", "write_rate")

DEFAULT_EDGES = {
    "file_opens": log_edges(0, 8),
    "bytes_read": log_edges(4, 15),
    "bytes_written": log_edges(4, 15),
    "read_rate": log_edges(0, 11),
    "write_rate": log_edges(0, 11),
}


def _values(job: JobRecord, summary: JobPerfSummary, normalize: str) -> dict[str, float | None]:
    duration = max(job.wall_seconds, 1)
    node_hours = max(job.node_hours, 1e-12)
    opens = summary.file_opens
    rx = summary.lustre_rx
    tx = summary.lustre_tx
    read_rate = None if rx is None else rx / duration
    write_rate = None if tx is None else tx / duration
    if normalize == "per_node_hour":
        opens = None if opens is None else opens / node_hours
        rx = None if rx is None else rx / node_hours
        tx = None if tx is None else tx / node_hours
        read_rate = None if read_rate is None else read_rate / job.nodes
        write_rate = None if write_rate is None else write_rate / job.nodes
    elif normalize != "per_job":
        raise ValueError(f"unknown normalization {normalize!r}")
    return {"file_opens": opens, "bytes_read": rx, "bytes_written": tx,
            "read_rate": read_rate, "write_rate": write_rate}


@dataclass
class LustreStats:
    normalize: str
    unweighted: dict[str, Histogram1D] = field(default_factory=dict)
    node_hour_weighted: dict[str, Histogram1D] = field(default_factory=dict)
    daily: list[tuple[date, float, float]] = field(default_factory=list)


def lustre_stats(jobs: Sequence[JobRecord],
                 summaries: Mapping[str, JobPerfSummary],
                 normalize: str = "per_job",
                 edges: Mapping[str, Sequence[float]] | None = None) -> LustreStats:
    """Distributions of filesystem activity per job, unweighted and
    node-hour weighted, plus the daily aggregate read/write series."""
    stats = LustreStats(normalize=normalize)
    for metric in METRICS:
        metric_edges = tuple((edges or {}).get(metric, DEFAULT_EDGES[metric]))
        stats.unweighted[metric] = Histogram1D(edges=metric_edges, weight_kind="jobs")
        stats.node_hour_weighted[metric] = Histogram1D(edges=metric_edges,
                                                       weight_kind="node_hours")
    daily: dict[date, list[float]] = {}
    for job in jobs:
        summary = summaries.get(job.job_id)
        values = (_values(job, summary, normalize) if summary is not None
                  else {metric: None for metric in METRICS})
        for metric in METRICS:
            value = values[metric]
            if value is None:
                stats.unweighted[metric].add_absent(1.0)
                stats.node_hour_weighted[metric].add_absent(job.node_hours)
            else:
                stats.unweighted[metric].add(value, 1.0)
                stats.node_hour_weighted[metric].add(value, job.node_hours)
        if summary is not None and (summary.lustre_rx is not None
                                    or summary.lustre_tx is not None):
            _apportion_daily(daily, job, summary.lustre_rx or 0.0,
                             summary.lustre_tx or 0.0)
    stats.daily = [(day, acc[0], acc[1]) for day, acc in sorted(daily.items())]
    return stats


def _apportion_daily(daily: dict[date, list[float]], job: JobRecord,
                     rx: float, tx: float) -> None:
    """Spread a job's bytes uniformly over its run window per UTC day."""
    duration = job.wall_seconds
    if duration <= 0:
        day = utc_date(job.end_time)
        acc = daily.setdefault(day, [0.0, 0.0])
        acc[0] += rx
        acc[1] += tx
        return
    cursor = job.start_time
    while cursor < job.end_time:
        day = utc_date(cursor)
        next_midnight = int((day + timedelta(days=1) - date(1970, 1, 1)).total_seconds())
        segment_end = min(job.end_time, next_midnight)
        share = (segment_end - cursor) / duration
        acc = daily.setdefault(day, [0.0, 0.0])
        acc[0] += rx * share
        acc[1] += tx * share
        cursor = segment_end
