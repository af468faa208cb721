"""Python access to the gridsiem simulator core."""

import json
from pathlib import Path

from . import _core
from ._core import ConfigInvalid, Error, InsufficientDisjointness, LogCorrupt

__all__ = [
    "ConfigInvalid",
    "Error",
    "InsufficientDisjointness",
    "LogCorrupt",
    "RunOutput",
    "disjoint_paths",
    "fixture_edges",
    "parse_log_line",
    "render_human",
    "replay",
    "run",
]


class RunOutput:
    def __init__(self, raw):
        self.report_text = raw["report"]
        self.report = json.loads(self.report_text)
        self.log = list(raw["log"])
        self.digest = raw["digest"]

    def incidents(self):
        return self.report["incidents"]


def run(scenario, seed=None, duration_s=None, no_reaction=False, log_path=None):
    raw = _core.run(str(scenario), seed, duration_s, no_reaction, None if log_path is None else Path(log_path))
    return RunOutput(raw)


def replay(log_path, rules):
    return json.loads(_core.replay(Path(log_path), str(rules)))


def render_human(report):
    text = report if isinstance(report, str) else json.dumps(report)
    return _core.render_human(text)


parse_log_line = _core.parse_log_line
disjoint_paths = _core.disjoint_paths
fixture_edges = _core.fixture_edges
