"""Static-analysis front end: external tool runners, report parsers, and the
hermetic built-in pattern analyzer."""

from codexity.analyzers.builtin import BUILTIN_RULES, BuiltinRule, run_builtin
from codexity.analyzers.config import (
    AllAnalyzersFailed,
    AnalyzerConfig,
    CompileFailed,
    MalformedReport,
    NonZeroExitWithoutReport,
    ToolNotFound,
    ToolTimeout,
    resolve_tool,
)
from codexity.analyzers.cppcheck import parse_cppcheck_xml, run_cppcheck
from codexity.analyzers.infer import parse_infer_report, run_infer
from codexity.analyzers.orchestrator import analyze

__all__ = [
    "AllAnalyzersFailed",
    "AnalyzerConfig",
    "BUILTIN_RULES",
    "BuiltinRule",
    "CompileFailed",
    "MalformedReport",
    "NonZeroExitWithoutReport",
    "ToolNotFound",
    "ToolTimeout",
    "analyze",
    "parse_cppcheck_xml",
    "parse_infer_report",
    "resolve_tool",
    "run_builtin",
    "run_cppcheck",
    "run_infer",
]
