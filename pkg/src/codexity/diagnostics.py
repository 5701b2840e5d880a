"""Unified vulnerability-finding model shared by every analyzer.

A finding is a ``Diagnostic`` (location + category + message); an analyzer run
produces an ``AnalysisReport``. Categories are either CWE ids or labels from a
closed registry of analyzer-native names, with a documented overlap-family
table used to collapse duplicate findings onto their CWE classification.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Optional, Tuple


class Analyzer(str, Enum):
    CPPCHECK = "cppcheck"
    INFER = "infer"
    BUILTIN = "builtin"


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"


#: Closed registry of analyzer-native category labels. Anything an analyzer
#: emits outside this set is folded into the ``Unknown:`` catch-all so that
#: unrecognized findings still count as vulnerabilities (fail-closed).
NATIVE_LABELS = frozenset(
    {
        "Null Dereference",
        "Nullptr Dereference",
        "Resource Leak",
        "Buffer Overrun L1",
        "Buffer Overrun L2",
        "Buffer Overrun L3",
        "Buffer Overrun S2",
        "Memory Leak",
        "Integer Overflow L2",
        "Use After Lifetime",
        "Use After Free",
        "Inferbo Alloc Is Zero",
        "Unknown",
    }
)

#: Native labels that describe the same weakness family as a CWE id. When a
#: native finding and a CWE finding land on the same (file, line), the CWE
#: classification wins and the native duplicate is dropped.
OVERLAP_FAMILIES: Mapping[str, frozenset[int]] = {
    "Buffer Overrun L1": frozenset({119, 787, 788}),
    "Buffer Overrun L2": frozenset({119, 787, 788}),
    "Buffer Overrun L3": frozenset({119, 787, 788}),
    "Buffer Overrun S2": frozenset({119, 787, 788}),
    "Null Dereference": frozenset({476}),
    "Nullptr Dereference": frozenset({476}),
    "Memory Leak": frozenset({401}),
    "Resource Leak": frozenset({775}),
}

_CWE_TEXT = re.compile(r"^CWE-(\d+)$")


@dataclass(frozen=True)
class SourceLocation:
    """File/line(/column) position of a finding. Lines and columns are 1-based."""

    file: str
    line: int
    column: Optional[int] = None

    def __post_init__(self) -> None:
        if self.line < 1:
            raise ValueError(f"line must be >= 1, got {self.line}")
        if self.column is not None and self.column < 1:
            raise ValueError(f"column must be >= 1, got {self.column}")


@dataclass(frozen=True)
class VulnerabilityCategory:
    """Either a CWE id (``cwe`` set) or a registry-native label (``label`` set)."""

    cwe: Optional[int] = None
    label: Optional[str] = None

    def __post_init__(self) -> None:
        if (self.cwe is None) == (self.label is None):
            raise ValueError("exactly one of cwe/label must be set")
        if self.cwe is not None and self.cwe < 1:
            raise ValueError(f"CWE id must be positive, got {self.cwe}")
        if self.label is not None and not self._label_allowed(self.label):
            raise ValueError(f"native label not in registry: {self.label!r}")

    @staticmethod
    def _label_allowed(label: str) -> bool:
        return label in NATIVE_LABELS or label.startswith("Unknown:")

    @classmethod
    def from_cwe(cls, number: int) -> "VulnerabilityCategory":
        return cls(cwe=number)

    @classmethod
    def native(cls, label: str) -> "VulnerabilityCategory":
        """Build a native category, folding unregistered labels into Unknown."""
        if cls._label_allowed(label):
            return cls(label=label)
        return cls(label=f"Unknown:{label}")

    @classmethod
    def parse(cls, text: str) -> "VulnerabilityCategory":
        m = _CWE_TEXT.match(text)
        if m:
            return cls(cwe=int(m.group(1)))
        return cls.native(text)

    @property
    def is_cwe(self) -> bool:
        return self.cwe is not None

    def display(self) -> str:
        if self.cwe is not None:
            return f"CWE-{self.cwe}"
        assert self.label is not None
        return self.label

    def overlaps(self, other: "VulnerabilityCategory") -> bool:
        """True when one side is native, the other a CWE of the same family."""
        native, cwe = (self, other) if self.label is not None else (other, self)
        if native.label is None or cwe.cwe is None:
            return False
        return cwe.cwe in OVERLAP_FAMILIES.get(native.label, frozenset())


@dataclass(frozen=True)
class Diagnostic:
    location: SourceLocation
    category: VulnerabilityCategory
    message: str
    analyzer: Analyzer
    severity: Severity = Severity.ERROR

    def __post_init__(self) -> None:
        if not self.message:
            raise ValueError("diagnostic message must be non-empty")
        if self.analyzer is Analyzer.BUILTIN and not self.category.is_cwe:
            raise ValueError("builtin diagnostics must carry a CWE category")

    def sort_key(self) -> tuple:
        # Absent column sorts before any present column.
        col = (0, 0) if self.location.column is None else (1, self.location.column)
        return (
            self.location.file,
            self.location.line,
            col,
            self.category.display(),
            self.message,
            self.analyzer.value,
        )


@dataclass(frozen=True)
class AnalysisReport:
    """Ordered findings from one analysis pass, plus which tools ran or failed."""

    diagnostics: Tuple[Diagnostic, ...] = ()
    analyzers_run: frozenset = frozenset()
    analyzer_failures: Tuple[Tuple[Analyzer, str], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "diagnostics", tuple(sorted(self.diagnostics, key=Diagnostic.sort_key))
        )
        object.__setattr__(self, "analyzers_run", frozenset(self.analyzers_run))
        object.__setattr__(self, "analyzer_failures", tuple(self.analyzer_failures))
        for diag in self.diagnostics:
            if diag.analyzer not in self.analyzers_run:
                raise ValueError(
                    f"diagnostic from {diag.analyzer.value} but that analyzer is not in analyzers_run"
                )

    def merged_with(self, other: "AnalysisReport") -> "AnalysisReport":
        return AnalysisReport(
            diagnostics=self.diagnostics + other.diagnostics,
            analyzers_run=self.analyzers_run | other.analyzers_run,
            analyzer_failures=self.analyzer_failures + other.analyzer_failures,
        )


def dedupe(report: AnalysisReport) -> AnalysisReport:
    """Collapse duplicate findings that share a (file, line).

    Two findings merge when their categories are identical, or when one is a
    CWE and the other a native label of the same overlap family; the CWE side
    survives. Idempotent and insensitive to input order.
    """
    by_line: dict[tuple[str, int], list[Diagnostic]] = {}
    for diag in report.diagnostics:
        by_line.setdefault((diag.location.file, diag.location.line), []).append(diag)

    survivors: list[Diagnostic] = []
    for group in by_line.values():
        group.sort(key=Diagnostic.sort_key)
        cwes_present = {d.category.cwe for d in group if d.category.is_cwe}
        seen: set[str] = set()
        for diag in group:
            if not diag.category.is_cwe:
                family = OVERLAP_FAMILIES.get(diag.category.label or "", frozenset())
                if family & cwes_present:
                    continue  # absorbed by the CWE finding at this line
            key = diag.category.display()
            if key in seen:
                continue
            seen.add(key)
            survivors.append(diag)

    return AnalysisReport(
        diagnostics=tuple(survivors),
        analyzers_run=report.analyzers_run,
        analyzer_failures=report.analyzer_failures,
    )


def summarize(reports: Iterable[AnalysisReport]) -> dict[str, int]:
    """Per-category finding totals across already-deduped reports."""
    counts: dict[str, int] = {}
    for report in reports:
        for diag in report.diagnostics:
            key = diag.category.display()
            counts[key] = counts.get(key, 0) + 1
    return counts


def is_vulnerable(report: AnalysisReport) -> bool:
    return len(dedupe(report).diagnostics) > 0


# --- canonical JSON shape (run logs, service API) ---------------------------


def diagnostic_to_dict(diag: Diagnostic) -> dict:
    return {
        "file": diag.location.file,
        "line": diag.location.line,
        "column": diag.location.column,
        "category": diag.category.display(),
        "message": diag.message,
        "analyzer": diag.analyzer.value,
        "severity": diag.severity.value,
    }


def diagnostic_from_dict(data: Mapping) -> Diagnostic:
    return Diagnostic(
        location=SourceLocation(
            file=data["file"], line=data["line"], column=data.get("column")
        ),
        category=VulnerabilityCategory.parse(data["category"]),
        message=data["message"],
        analyzer=Analyzer(data["analyzer"]),
        severity=Severity(data["severity"]),
    )


def report_to_dict(report: AnalysisReport) -> dict:
    return {
        "diagnostics": [diagnostic_to_dict(d) for d in report.diagnostics],
        "analyzersRun": sorted(a.value for a in report.analyzers_run),
        "analyzerFailures": [
            {"analyzer": analyzer.value, "reason": reason}
            for analyzer, reason in report.analyzer_failures
        ],
    }


def report_from_dict(data: Mapping) -> AnalysisReport:
    return AnalysisReport(
        diagnostics=tuple(diagnostic_from_dict(d) for d in data["diagnostics"]),
        analyzers_run=frozenset(Analyzer(a) for a in data["analyzersRun"]),
        analyzer_failures=tuple(
            (Analyzer(f["analyzer"]), f["reason"]) for f in data["analyzerFailures"]
        ),
    )
