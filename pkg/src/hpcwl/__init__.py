"""Workload characterization toolkit for HPC job accounting and
node-performance data: ingest, per-job summaries, application
identification, aggregate metrics, queue replay, statistical models and
report bundles."""

__version__ = "0.1.0"
