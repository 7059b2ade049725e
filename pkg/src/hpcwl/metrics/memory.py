"""Memory usage distributions built from per-job performance summaries.

Jobs without memory data are never dropped: their weight goes to the
histogram's absent bucket (or is totaled separately for the large-memory
breakdown) so consumers can see how much usage the plots cannot represent.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from ..errors import NoFactorForDate
from ..ingest import JobRecord, ResourceSpec, job_xd_su
from ..perfsummary import JobPerfSummary
from .histograms import (
    Histogram1D,
    Histogram2D,
    default_job_size_edges,
    default_memory_edges,
    fraction_edges,
    log_edges,
)
from .rollups import job_weight


def node_mem_available(spec: ResourceSpec, queue: str) -> float | None:
    """Memory available per node for a job's queue, in bytes."""
    if queue in spec.large_memory_queues and spec.large_mem_per_node is not None:
        return float(spec.large_mem_per_node)
    if spec.mem_per_node is None:
        return None
    return float(spec.mem_per_node)


def mem_fraction(job: JobRecord, summary: JobPerfSummary, spec: ResourceSpec,
                 peak: bool = False) -> float | None:
    """Fraction of the available node memory the job used (avg or peak).

    Per-core usage is scaled by the node's core count, which reproduces the
    per-node usage regardless of how many cores the job occupied.
    """
    per_core = summary.mem_max_per_core if peak else summary.mem_avg_per_core
    if per_core is None:
        return None
    available = node_mem_available(spec, job.queue)
    if available is None or available <= 0:
        return None
    return per_core * spec.cores_per_node / available


def total_peak_mem(summary: JobPerfSummary, spec: ResourceSpec,
                   nodes: int) -> float | None:
    """Peak memory of the whole job in bytes."""
    if summary.mem_max_per_core is None:
        return None
    return summary.mem_max_per_core * spec.cores_per_node * nodes


def memory_histograms(jobs: Sequence[JobRecord],
                      summaries: Mapping[str, JobPerfSummary],
                      resources: Mapping[str, ResourceSpec],
                      mode: str = "per_core_avg",
                      weight: str = "core_hours",
                      edges: Sequence[float] | None = None) -> Histogram1D:
    """Histogram of per-core memory (bytes), average or peak, weighted."""
    if mode not in ("per_core_avg", "per_core_max"):
        raise ValueError(f"unknown mode {mode!r}")
    hist = Histogram1D(edges=tuple(edges) if edges else default_memory_edges(),
                       weight_kind=weight)
    for job in jobs:
        try:
            w = job_weight(job, weight, resources)
        except (NoFactorForDate, KeyError):
            w = 0.0
        summary = summaries.get(job.job_id)
        value = None
        if summary is not None:
            value = (summary.mem_avg_per_core if mode == "per_core_avg"
                     else summary.mem_max_per_core)
        if value is None:
            hist.add_absent(w)
        else:
            hist.add(value, w)
    return hist


X_AXES = ("fraction_cores_of_system", "cpu_user_fraction", "nodes")
Y_AXES = ("fraction_mem_used", "total_peak_mem")


def memory_2d(jobs: Sequence[JobRecord],
              summaries: Mapping[str, JobPerfSummary],
              resources: Mapping[str, ResourceSpec],
              x: str = "cpu_user_fraction",
              y: str = "fraction_mem_used",
              weight: str = "core_hours",
              x_edges: Sequence[float] | None = None,
              y_edges: Sequence[float] | None = None) -> Histogram2D:
    """2-D histogram pairing a memory measure with a job-shape measure."""
    if x not in X_AXES:
        raise ValueError(f"unknown x axis {x!r}")
    if y not in Y_AXES:
        raise ValueError(f"unknown y axis {y!r}")
    if x_edges is None:
        x_edges = default_job_size_edges() if x == "nodes" else fraction_edges()
    if y_edges is None:
        y_edges = (log_edges(8, 15) if y == "total_peak_mem" else fraction_edges())
    hist = Histogram2D(x_edges=tuple(x_edges), y_edges=tuple(y_edges),
                       weight_kind=weight)
    for job in jobs:
        try:
            w = job_weight(job, weight, resources)
        except (NoFactorForDate, KeyError):
            w = 0.0
        summary = summaries.get(job.job_id)
        spec = resources.get(job.resource)
        xv = yv = None
        if summary is not None and spec is not None:
            if x == "fraction_cores_of_system":
                xv = job.cores / spec.total_cores
            elif x == "cpu_user_fraction":
                xv = summary.cpu_user_fraction
            else:
                xv = float(job.nodes)
            if y == "fraction_mem_used":
                yv = mem_fraction(job, summary, spec)
            else:
                yv = total_peak_mem(summary, spec, job.nodes)
        if xv is None or yv is None:
            hist.add_absent(w)
        else:
            hist.add(xv, yv, w)
    return hist


@dataclass
class LargeMemoryBreakdown:
    """XD SU of high-memory jobs split into normal-queue and large-queue
    series, grouped two ways."""

    normal_threshold: float
    large_threshold: float
    by_parent_science: dict[str, dict[str, float]] = field(default_factory=dict)
    by_app: dict[str, dict[str, float]] = field(default_factory=dict)
    absent_xd_su: float = 0.0  # usage that memory data cannot represent

    def _add(self, series: str, parent_science: str, app: str, su: float) -> None:
        ps = self.by_parent_science.setdefault(series, {})
        ps[parent_science] = ps.get(parent_science, 0.0) + su
        ap = self.by_app.setdefault(series, {})
        ap[app] = ap.get(app, 0.0) + su


def large_memory_breakdown(jobs: Sequence[JobRecord],
                           summaries: Mapping[str, JobPerfSummary],
                           resources: Mapping[str, ResourceSpec],
                           normal_threshold: float = 0.8,
                           large_threshold: float = 0.1) -> LargeMemoryBreakdown:
    """High-memory usage by parent science and application, in XD SU.

    Normal-queue jobs qualify above normal_threshold of node memory at peak;
    large-memory-queue jobs above large_threshold of the large node memory.
    """
    out = LargeMemoryBreakdown(normal_threshold=normal_threshold,
                               large_threshold=large_threshold)
    for job in jobs:
        spec = resources.get(job.resource)
        if spec is None:
            continue
        try:
            su = job_xd_su(job, resources)
        except NoFactorForDate:
            continue
        summary = summaries.get(job.job_id)
        fraction = (mem_fraction(job, summary, spec, peak=True)
                    if summary is not None else None)
        if fraction is None:
            out.absent_xd_su += su
            continue
        on_large_queue = job.queue in spec.large_memory_queues
        if on_large_queue and fraction > large_threshold:
            out._add("large", job.parent_science, summary.app_label, su)
        elif not on_large_queue and fraction > normal_threshold:
            out._add("normal", job.parent_science, summary.app_label, su)
    return out
