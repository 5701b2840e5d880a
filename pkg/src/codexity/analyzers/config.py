"""Analyzer selection, tool path resolution, and the failure taxonomy."""

from __future__ import annotations

import os
import shutil
from dataclasses import dataclass, field
from typing import Optional

from codexity.diagnostics import Analyzer

#: Environment variables that override tool discovery on PATH.
TOOL_ENV_VARS = {
    Analyzer.CPPCHECK: "CODEXITY_CPPCHECK",
    Analyzer.INFER: "CODEXITY_INFER",
}


class ToolNotFound(RuntimeError):
    """The analyzer binary could not be resolved."""


class ToolTimeout(RuntimeError):
    """The analyzer subprocess exceeded its time budget."""


class NonZeroExitWithoutReport(RuntimeError):
    """The tool failed outright and produced no report to parse."""


class CompileFailed(RuntimeError):
    """The compile step a tool depends on rejected the source."""


class MalformedReport(RuntimeError):
    """A tool report could not be parsed; carries reason and, when known, offset."""

    def __init__(self, reason: str, offset: Optional[tuple[int, int]] = None):
        super().__init__(reason if offset is None else f"{reason} at {offset}")
        self.reason = reason
        self.offset = offset


class AllAnalyzersFailed(RuntimeError):
    """Every enabled analyzer errored; there is no verdict to report."""


@dataclass
class AnalyzerConfig:
    enabled: frozenset = field(default_factory=lambda: frozenset({Analyzer.BUILTIN}))
    cppcheck_path: Optional[str] = None
    infer_path: Optional[str] = None
    compiler_command: str = "cc -c"
    timeout_seconds: float = 60.0
    work_dir: Optional[str] = None

    def __post_init__(self) -> None:
        self.enabled = frozenset(Analyzer(a) for a in self.enabled)
        if not self.enabled:
            raise ValueError("at least one analyzer must be enabled")
        if self.timeout_seconds <= 0:
            raise ValueError("timeout_seconds must be positive")


def resolve_tool(analyzer: Analyzer, configured_path: Optional[str]) -> str:
    """Resolve a tool binary: explicit config > env override > PATH lookup."""
    candidate = configured_path or os.environ.get(TOOL_ENV_VARS[analyzer], "")
    if candidate:
        found = shutil.which(candidate) or (candidate if os.path.isfile(candidate) else None)
        if found is None:
            raise ToolNotFound(f"{analyzer.value} not found at {candidate!r}")
        return found
    found = shutil.which(analyzer.value)
    if found is None:
        raise ToolNotFound(f"{analyzer.value} not found on PATH")
    return found
