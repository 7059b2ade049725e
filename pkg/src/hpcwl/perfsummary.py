"""Reduce per-node performance archives to one summary per job.

Counter metrics accumulate monotonically: the job's value is the epilog
reading minus the prolog reading, summed over the job's nodes, with a counter
reset treated as contributing the post-reset value.  Instantaneous metrics
are point samples: only readings strictly inside the job's run window are
used, unweighted.  Jobs with no in-window samples get absent fields, never
zeros.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

from . import appident
from .errors import InvalidMemInfo, MissingEpilog, MissingProlog
from .ingest import JobRecord

# canonical counter metric names in the archive schema
CPU_USER = "cpu_user_ticks"
CPU_TOTAL = "cpu_total_ticks"
LUSTRE_RX = "lustre_rx_bytes"
LUSTRE_TX = "lustre_tx_bytes"
IB_RX = "ib_rx_bytes"
IB_TX = "ib_tx_bytes"
FILE_OPENS = "file_opens"
# canonical instantaneous metric name
RUNNABLE_THREADS = "runnable_threads"


class SampleKind(str, Enum):
    COUNTER = "counter"
    INSTANTANEOUS = "instantaneous"


class SampleTag(str, Enum):
    PERIODIC = "periodic"
    JOB_PROLOG = "job_prolog"
    JOB_EPILOG = "job_epilog"


class LaunchType(str, Enum):
    SERIAL = "serial"
    MULTI_PROCESS = "multi_process"
    MULTI_THREADED = "multi_threaded"
    MULTI_PROCESS_MULTI_THREADED = "multi_process_multi_threaded"
    UNKNOWN = "unknown"


@dataclass(frozen=True, slots=True)
class PerfSample:
    node: str
    time: int
    metric: str
    kind: SampleKind
    value: float
    tag: SampleTag = SampleTag.PERIODIC

    def __post_init__(self):
        if self.value < 0:
            raise ValueError(f"negative sample value for {self.metric}")


@dataclass(frozen=True, slots=True)
class NumaMem:
    mem_total: int
    mem_free: int
    file_pages: int
    slab: int

    def used_bytes(self) -> int:
        if min(self.mem_total, self.mem_free, self.file_pages, self.slab) < 0:
            raise InvalidMemInfo("negative meminfo component")
        used = self.mem_total - self.mem_free - self.file_pages - self.slab
        if used < 0:
            raise InvalidMemInfo("free+cache exceeds MemTotal")
        return used


@dataclass(frozen=True, slots=True)
class MemInfoSample:
    node: str
    time: int
    numa_nodes: tuple[NumaMem, ...]


@dataclass(frozen=True, slots=True)
class LauncherInfo:
    exe: str | None
    n_processes: int = 1
    threads_per_process: int = 1


@dataclass(frozen=True, slots=True)
class JobArchive:
    """All performance records collected for one job."""

    job_id: str
    nodes: tuple[str, ...]
    samples: tuple[PerfSample, ...] = ()
    meminfo: tuple[MemInfoSample, ...] = ()
    launcher: LauncherInfo | None = None
    processes: tuple[appident.ProcessObservation, ...] = ()


@dataclass(frozen=True, slots=True)
class JobPerfSummary:
    job_id: str
    cpu_user_fraction: float | None = None
    mem_avg_per_core: float | None = None
    mem_max_per_core: float | None = None
    lustre_rx: float | None = None
    lustre_tx: float | None = None
    ib_rx: float | None = None
    ib_tx: float | None = None
    non_lustre_ib: float | None = None
    runnable_threads_median: float | None = None
    file_opens: float | None = None
    app_label: str = appident.NOT_AVAILABLE
    launch_type: LaunchType = LaunchType.UNKNOWN
    samples_used: int = 0
    flags: tuple[str, ...] = ()

    @property
    def lustre_total(self) -> float | None:
        if self.lustre_rx is None and self.lustre_tx is None:
            return None
        return (self.lustre_rx or 0.0) + (self.lustre_tx or 0.0)

    @property
    def ib_total(self) -> float | None:
        if self.ib_rx is None and self.ib_tx is None:
            return None
        return (self.ib_rx or 0.0) + (self.ib_tx or 0.0)


def memory_per_core(sample: MemInfoSample, n_cores: int) -> float:
    """Used bytes per core: non-cache memory summed over NUMA nodes divided
    by the node's core count."""
    if n_cores < 1:
        raise ValueError("n_cores must be >= 1")
    return sum(numa.used_bytes() for numa in sample.numa_nodes) / n_cores


def counter_delta(values: Sequence[float]) -> tuple[float, bool]:
    """Total accumulation over an ordered counter sample list.

    A decrease is a counter reset: that segment contributes the post-reset
    value.  Returns (delta, reset_seen).  Splitting the list at any interior
    sample and summing the two deltas reproduces the whole-list delta.
    """
    delta = 0.0
    reset = False
    for prev, cur in zip(values, values[1:]):
        if cur >= prev:
            delta += cur - prev
        else:
            delta += cur
            reset = True
    return delta, reset


def non_lustre_ib(ib_total: float, lustre_total: float) -> tuple[float, bool]:
    """Interconnect traffic net of filesystem traffic, clamped at zero.

    Returns (bytes, clamped).
    """
    if ib_total < 0 or lustre_total < 0:
        raise ValueError("byte totals must be nonnegative")
    remainder = ib_total - lustre_total
    if remainder < 0:
        return 0.0, True
    return remainder, False


def classify_launch_type(n_processes: int, threads_per_process: int,
                         instrumented: bool) -> LaunchType:
    if n_processes < 0 or threads_per_process < 0:
        raise ValueError("counts must be >= 0")
    if not instrumented or n_processes == 0 or threads_per_process == 0:
        return LaunchType.UNKNOWN
    if n_processes == 1 and threads_per_process == 1:
        return LaunchType.SERIAL
    if n_processes > 1 and threads_per_process == 1:
        return LaunchType.MULTI_PROCESS
    if n_processes == 1:
        return LaunchType.MULTI_THREADED
    return LaunchType.MULTI_PROCESS_MULTI_THREADED


def median(values: Sequence[float]) -> float:
    ordered = sorted(values)
    n = len(ordered)
    if n == 0:
        raise ValueError("median of empty sequence")
    mid = n // 2
    if n % 2:
        return float(ordered[mid])
    return (ordered[mid - 1] + ordered[mid]) / 2.0


def _node_counter_delta(samples: list[PerfSample], node: str, metric: str) -> tuple[float, bool]:
    """Delta for one (node, metric); raises when prolog/epilog is missing."""
    prologs = [s for s in samples if s.tag is SampleTag.JOB_PROLOG]
    epilogs = [s for s in samples if s.tag is SampleTag.JOB_EPILOG]
    if not prologs:
        raise MissingProlog(node, metric)
    if not epilogs:
        raise MissingEpilog(node, metric)
    start = max(prologs, key=lambda s: s.time)
    end = min(epilogs, key=lambda s: s.time)
    interior = [s for s in samples
                if s.tag is SampleTag.PERIODIC and start.time <= s.time <= end.time]
    ordered = sorted([start, *interior, end], key=lambda s: s.time)
    return counter_delta([s.value for s in ordered])


def _sum_counter(by_node: Mapping[tuple[str, str], list[PerfSample]],
                 nodes: Sequence[str], metric: str,
                 flags: list[str]) -> float | None:
    """Sum a counter metric over nodes; None when no node collected it."""
    total = 0.0
    seen = False
    for node in nodes:
        samples = by_node.get((node, metric))
        if not samples:
            continue
        seen = True
        delta, reset = _node_counter_delta(samples, node, metric)
        if reset:
            flags.append(f"counter_regression:{node}:{metric}")
        total += delta
    return total if seen else None


def summarize_job(job: JobRecord, archive: JobArchive, cores_per_node: int,
                  db: Sequence[appident.AppPattern] | None = None,
                  ignore_list: Iterable[str] | None = None) -> JobPerfSummary:
    """Build the per-job summary from the job's node archives."""
    if not archive.nodes:
        raise ValueError(f"job {job.job_id}: node list unknown")
    if db is None:
        db = appident.load_pattern_db()
    if ignore_list is None:
        ignore_list = appident.load_ignore_list()
    flags: list[str] = []

    by_node: dict[tuple[str, str], list[PerfSample]] = {}
    for sample in archive.samples:
        by_node.setdefault((sample.node, sample.metric), []).append(sample)

    user_delta = _sum_counter(by_node, archive.nodes, CPU_USER, flags)
    total_delta = _sum_counter(by_node, archive.nodes, CPU_TOTAL, flags)
    cpu_fraction = None
    if user_delta is not None and total_delta is not None and total_delta > 0:
        cpu_fraction = user_delta / total_delta
        if cpu_fraction > 1.0 or cpu_fraction < 0.0:
            flags.append("cpu_fraction_clamped")
            cpu_fraction = min(1.0, max(0.0, cpu_fraction))

    lustre_rx = _sum_counter(by_node, archive.nodes, LUSTRE_RX, flags)
    lustre_tx = _sum_counter(by_node, archive.nodes, LUSTRE_TX, flags)
    ib_rx = _sum_counter(by_node, archive.nodes, IB_RX, flags)
    ib_tx = _sum_counter(by_node, archive.nodes, IB_TX, flags)
    opens = _sum_counter(by_node, archive.nodes, FILE_OPENS, flags)

    nli = None
    if ib_rx is not None or ib_tx is not None:
        ib_total = (ib_rx or 0.0) + (ib_tx or 0.0)
        lustre_total = (lustre_rx or 0.0) + (lustre_tx or 0.0)
        nli, clamped = non_lustre_ib(ib_total, lustre_total)
        if clamped:
            flags.append("non_lustre_ib_clamped")

    in_window = lambda t: job.start_time < t < job.end_time
    samples_used = 0

    runnable = [s.value for s in archive.samples
                if s.metric == RUNNABLE_THREADS and s.kind is SampleKind.INSTANTANEOUS
                and s.node in archive.nodes and in_window(s.time)]
    samples_used += len(runnable)
    runnable_median = median(runnable) if runnable else None

    mem_values = [memory_per_core(m, cores_per_node) for m in archive.meminfo
                  if m.node in archive.nodes and in_window(m.time)]
    samples_used += len(mem_values)
    mem_avg = sum(mem_values) / len(mem_values) if mem_values else None
    mem_max = max(mem_values) if mem_values else None

    label = appident.resolve_job_app(
        launcher_present=archive.launcher is not None,
        launcher_exe=archive.launcher.exe if archive.launcher else None,
        observations=archive.processes,
        db=db, ignore_list=ignore_list)
    if archive.launcher is not None:
        launch = classify_launch_type(archive.launcher.n_processes,
                                      archive.launcher.threads_per_process,
                                      instrumented=True)
    else:
        launch = LaunchType.UNKNOWN

    return JobPerfSummary(
        job_id=job.job_id,
        cpu_user_fraction=cpu_fraction,
        mem_avg_per_core=mem_avg,
        mem_max_per_core=mem_max,
        lustre_rx=lustre_rx,
        lustre_tx=lustre_tx,
        ib_rx=ib_rx,
        ib_tx=ib_tx,
        non_lustre_ib=nli,
        runnable_threads_median=runnable_median,
        file_opens=opens,
        app_label=label,
        launch_type=launch,
        samples_used=samples_used,
        flags=tuple(flags),
    )


def summarize_all(jobs: Sequence[JobRecord],
                  archives: Mapping[str, JobArchive],
                  cores_per_node_of, db=None, ignore_list=None):
    """Summarize every job that has an archive with a known node list.

    cores_per_node_of maps a JobRecord to its resource's cores per node.
    Returns (summaries by job_id, skip reasons by job_id).  Jobs without an
    archive get no summary, never a partial one.
    """
    if db is None:
        db = appident.load_pattern_db()
    if ignore_list is None:
        ignore_list = appident.load_ignore_list()
    summaries: dict[str, JobPerfSummary] = {}
    skipped: dict[str, str] = {}
    for job in jobs:
        archive = archives.get(job.job_id)
        if archive is None or not archive.nodes:
            skipped[job.job_id] = "no_archive"
            continue
        try:
            summaries[job.job_id] = summarize_job(
                job, archive, cores_per_node_of(job), db=db, ignore_list=ignore_list)
        except (MissingProlog, MissingEpilog) as err:
            skipped[job.job_id] = str(err)
    return summaries, skipped


# ---------------------------------------------------------------------------
# archive JSONL

def load_archives(path) -> dict[str, JobArchive]:
    """Read the archive JSONL (schema in docs/formats.md) grouped by job."""
    nodes: dict[str, tuple[str, ...]] = {}
    samples: dict[str, list[PerfSample]] = {}
    meminfo: dict[str, list[MemInfoSample]] = {}
    launcher: dict[str, LauncherInfo] = {}
    processes: dict[str, list[appident.ProcessObservation]] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            if not line.strip():
                continue
            raw = json.loads(line)
            kind = raw["type"]
            job_id = str(raw["job_id"])
            if kind == "job":
                nodes[job_id] = tuple(str(n) for n in raw["nodes"])
            elif kind == "perf":
                samples.setdefault(job_id, []).append(PerfSample(
                    node=str(raw["node"]), time=int(raw["time"]),
                    metric=str(raw["metric"]), kind=SampleKind(raw["kind"]),
                    value=float(raw["value"]), tag=SampleTag(raw.get("tag", "periodic"))))
            elif kind == "meminfo":
                numa = tuple(NumaMem(int(n["mem_total"]), int(n["mem_free"]),
                                     int(n["file_pages"]), int(n["slab"]))
                             for n in raw["numa"])
                meminfo.setdefault(job_id, []).append(MemInfoSample(
                    node=str(raw["node"]), time=int(raw["time"]), numa_nodes=numa))
            elif kind == "launcher":
                launcher[job_id] = LauncherInfo(
                    exe=raw.get("exe"),
                    n_processes=int(raw.get("n_processes", 1)),
                    threads_per_process=int(raw.get("threads_per_process", 1)))
            elif kind == "process":
                processes.setdefault(job_id, []).append(appident.ProcessObservation(
                    process_name=str(raw["process_name"]),
                    unique_pid_count=int(raw["unique_pid_count"])))
            else:
                raise ValueError(f"unknown archive record type {kind!r}")
    job_ids = set(nodes) | set(samples) | set(meminfo) | set(launcher) | set(processes)
    return {
        job_id: JobArchive(
            job_id=job_id,
            nodes=nodes.get(job_id, ()),
            samples=tuple(sorted(samples.get(job_id, ()), key=lambda s: (s.node, s.time))),
            meminfo=tuple(sorted(meminfo.get(job_id, ()), key=lambda m: (m.node, m.time))),
            launcher=launcher.get(job_id),
            processes=tuple(processes.get(job_id, ())),
        )
        for job_id in sorted(job_ids)
    }


def write_summaries(summaries: Mapping[str, JobPerfSummary], path) -> None:
    """Emit summaries as JSONL keyed by job_id, sorted for reproducibility."""
    with open(path, "w", encoding="utf-8") as handle:
        for job_id in sorted(summaries):
            s = summaries[job_id]
            handle.write(json.dumps({
                "job_id": s.job_id,
                "cpu_user_fraction": s.cpu_user_fraction,
                "mem_avg_per_core": s.mem_avg_per_core,
                "mem_max_per_core": s.mem_max_per_core,
                "lustre_rx": s.lustre_rx,
                "lustre_tx": s.lustre_tx,
                "ib_rx": s.ib_rx,
                "ib_tx": s.ib_tx,
                "non_lustre_ib": s.non_lustre_ib,
                "runnable_threads_median": s.runnable_threads_median,
                "file_opens": s.file_opens,
                "app_label": s.app_label,
                "launch_type": s.launch_type.value,
                "samples_used": s.samples_used,
                "flags": list(s.flags),
            }, sort_keys=True))
            handle.write("\n")
