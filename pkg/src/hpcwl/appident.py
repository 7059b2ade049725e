"""Identify the community application a job ran.

Classification is regex matching of the job's executable path against an
ordered pattern database.  When launcher metadata is available it names the
executable directly; otherwise the main process is picked from the node
process lists by descending unique-PID count, skipping an ignore list of
common unix utilities.  Jobs with a usable source but no pattern match are
"uncategorized"; jobs with no source at all are "NA".
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources as importlib_resources
from typing import Iterable, Sequence

from .errors import InvalidPattern

UNCATEGORIZED = "uncategorized"
NOT_AVAILABLE = "NA"
PROPRIETARY = "proprietary-masked"


@dataclass(frozen=True, slots=True)
class AppPattern:
    """One application with its ordered match patterns."""

    app_name: str
    patterns: tuple[re.Pattern, ...]
    proprietary: bool = False


@dataclass(frozen=True, slots=True)
class ProcessObservation:
    """A process name seen on a job's nodes with its unique PID count."""

    process_name: str
    unique_pid_count: int

    def __post_init__(self):
        if self.unique_pid_count < 1:
            raise ValueError("unique_pid_count must be >= 1")


def _compile(app_name: str, pattern: str) -> re.Pattern:
    try:
        return re.compile(pattern)
    except re.error as err:
        raise InvalidPattern(f"bad pattern for {app_name!r}: {err}") from None


def load_pattern_db(path=None) -> list[AppPattern]:
    """Load the tab-separated pattern database; file order is match priority.

    Repeated app names append alternative patterns to the first occurrence
    (the app keeps its original priority position).
    """
    if path is None:
        text = importlib_resources.files("hpcwl.data").joinpath("app_patterns.tsv").read_text("utf-8")
    else:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    order: list[str] = []
    patterns: dict[str, list[re.Pattern]] = {}
    proprietary: dict[str, bool] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) < 2:
            raise InvalidPattern(f"line {lineno}: expected app_name<TAB>pattern")
        name = parts[0].strip()
        regex = _compile(name, parts[1])
        flag = len(parts) > 2 and parts[2].strip().lower() in ("yes", "true", "1")
        if name not in patterns:
            order.append(name)
            patterns[name] = []
            proprietary[name] = flag
        patterns[name].append(regex)
        proprietary[name] = proprietary[name] or flag
    return [AppPattern(name, tuple(patterns[name]), proprietary[name]) for name in order]


def load_ignore_list(path=None) -> frozenset[str]:
    if path is None:
        text = importlib_resources.files("hpcwl.data").joinpath("process_ignore.txt").read_text("utf-8")
    else:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    names = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            names.add(line)
    return frozenset(names)


def pick_main_process(observations: Sequence[ProcessObservation],
                      ignore_list: Iterable[str]) -> str | None:
    """Most-PIDs-first scan for the first process not on the ignore list.

    Ties on PID count break lexicographically on the process name so the
    result is deterministic.
    """
    ignored = set(ignore_list)
    ranked = sorted(observations,
                    key=lambda obs: (-obs.unique_pid_count, obs.process_name))
    for obs in ranked:
        if obs.process_name not in ignored:
            return obs.process_name
    return None


def classify_executable(exe_or_process: str | None, db: Sequence[AppPattern],
                        source: str = "launcher",
                        mask_proprietary: bool = False) -> str:
    """Match an executable path against the DB; first match in DB order wins.

    source="none" yields "NA"; an unmatched executable yields "uncategorized".
    The true application name is returned unless mask_proprietary is set, in
    which case proprietary applications report as "proprietary-masked".
    """
    if source == "none" or exe_or_process is None:
        return NOT_AVAILABLE
    for app in db:
        for pattern in app.patterns:
            if pattern.search(exe_or_process):
                if app.proprietary and mask_proprietary:
                    return PROPRIETARY
                return app.app_name
    return UNCATEGORIZED


def resolve_job_app(launcher_present: bool, launcher_exe: str | None,
                    observations: Sequence[ProcessObservation] | None,
                    db: Sequence[AppPattern], ignore_list: Iterable[str],
                    mask_proprietary: bool = False) -> str:
    """Label a job: launcher metadata wins, then the process list, then NA.

    A job whose process list exists but consists entirely of ignored names is
    "uncategorized" (job-level data was present, nothing matched).
    """
    if launcher_present and launcher_exe:
        return classify_executable(launcher_exe, db, source="launcher",
                                   mask_proprietary=mask_proprietary)
    if observations:
        main = pick_main_process(observations, ignore_list)
        if main is None:
            return UNCATEGORIZED
        return classify_executable(main, db, source="process_list",
                                   mask_proprietary=mask_proprietary)
    return NOT_AVAILABLE
