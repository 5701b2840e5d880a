"""Hermetic pattern analyzer for C snippets.

Tokenizes the source (comment- and string-aware, total over arbitrary byte
text) and applies a small set of call-level rules, each mapped to a CWE:

  scanf-unbounded   scanf/fscanf with a ``%s`` conversion lacking a field width
  gets-call         any call to gets()
  fopen-null-deref  fopen() result used before a null check in the same function
  fopen-leak        fopen() with no matching fclose() in the same function
  alloc-leak        malloc/calloc result neither freed nor returned

This is a token-level heuristic, not a dataflow engine: it exists so the full
pipeline runs and is testable with no external tools installed. The external
analyzers are the production path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from codexity.diagnostics import (
    AnalysisReport,
    Analyzer,
    Diagnostic,
    Severity,
    SourceLocation,
    VulnerabilityCategory,
)


@dataclass(frozen=True)
class BuiltinRule:
    id: str
    cwe: int
    description: str


BUILTIN_RULES: Tuple[BuiltinRule, ...] = (
    BuiltinRule(
        "scanf-unbounded",
        119,
        "scanf() without field width limits can crash with huge input data",
    ),
    BuiltinRule(
        "gets-call",
        119,
        "gets() cannot limit input length and will overflow the destination buffer",
    ),
    BuiltinRule(
        "fopen-null-deref",
        476,
        "fopen() result may be NULL and is used without a null check",
    ),
    BuiltinRule(
        "fopen-leak",
        775,
        "fopen() result is never passed to fclose() in this function",
    ),
    BuiltinRule(
        "alloc-leak",
        401,
        "allocated memory is neither freed nor returned by this function",
    ),
)

_RULES_BY_ID = {rule.id: rule for rule in BUILTIN_RULES}


# --- lexer -------------------------------------------------------------------

ID = "id"
STR = "str"
CHAR = "char"
NUM = "num"
PUNCT = "punct"
DIRECTIVE = "directive"

_TWO_CHAR_OPS = {
    "==", "!=", "<=", ">=", "->", "&&", "||", "++", "--",
    "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<", ">>",
}


@dataclass(frozen=True)
class Token:
    kind: str
    value: str
    line: int


def tokenize(text: str) -> List[Token]:
    """Total lexer: any input yields a token list, garbage included."""
    tokens: List[Token] = []
    i, line, n = 0, 1, len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            i += 1
            continue
        if c in " \t\r\v\f":
            i += 1
            continue
        if c == "/" and i + 1 < n and text[i + 1] == "/":
            end = text.find("\n", i)
            i = n if end == -1 else end
            continue
        if c == "/" and i + 1 < n and text[i + 1] == "*":
            end = text.find("*/", i + 2)
            if end == -1:
                line += text.count("\n", i)
                i = n
            else:
                line += text.count("\n", i, end)
                i = end + 2
            continue
        if c == "#":
            # Preprocessor line, honoring backslash continuations.
            start_line = line
            j = i
            while j < n:
                if text[j] == "\n":
                    if j > i and text[j - 1] == "\\":
                        line += 1
                        j += 1
                        continue
                    break
                j += 1
            tokens.append(Token(DIRECTIVE, text[i:j], start_line))
            i = j
            continue
        if c in "\"'":
            quote = c
            start_line = line
            j = i + 1
            while j < n:
                if text[j] == "\\" and j + 1 < n:
                    j += 2
                    continue
                if text[j] == quote:
                    j += 1
                    break
                if text[j] == "\n":
                    break  # unterminated literal: close at end of line
                j += 1
            value = text[i + 1 : j - 1] if j <= n and j > i + 1 and text[j - 1 : j] == quote else text[i + 1 : j]
            tokens.append(Token(STR if quote == '"' else CHAR, value, start_line))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token(ID, text[i:j], line))
            i = j
            continue
        if c.isdigit() or (c == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i + 1
            while j < n and (
                text[j].isalnum()
                or text[j] in "._"
                or (text[j] in "+-" and text[j - 1] in "eEpP")
            ):
                j += 1
            tokens.append(Token(NUM, text[i:j], line))
            i = j
            continue
        pair = text[i : i + 2]
        if pair in _TWO_CHAR_OPS:
            tokens.append(Token(PUNCT, pair, line))
            i += 2
            continue
        tokens.append(Token(PUNCT, c, line))
        i += 1
    return tokens


def _match_paren(tokens: Sequence[Token], open_idx: int) -> int:
    """Index of the ')' matching tokens[open_idx] == '(' (len(tokens) if unterminated)."""
    depth = 0
    for idx in range(open_idx, len(tokens)):
        value = tokens[idx].value
        if tokens[idx].kind == PUNCT:
            if value == "(":
                depth += 1
            elif value == ")":
                depth -= 1
                if depth == 0:
                    return idx
    return len(tokens)


def _split_call_args(tokens: Sequence[Token], open_idx: int) -> Tuple[List[List[Token]], int]:
    """Split the argument list of a call whose '(' is at open_idx.

    Returns (args, close_idx); tolerates an unterminated call.
    """
    close = _match_paren(tokens, open_idx)
    args: List[List[Token]] = []
    current: List[Token] = []
    depth = 0
    for idx in range(open_idx + 1, min(close, len(tokens))):
        tok = tokens[idx]
        if tok.kind == PUNCT and tok.value in "([{":
            depth += 1
        elif tok.kind == PUNCT and tok.value in ")]}":
            depth -= 1
        elif tok.kind == PUNCT and tok.value == "," and depth == 0:
            args.append(current)
            current = []
            continue
        current.append(tok)
    if current or args:
        args.append(current)
    return args, close


def _function_scopes(tokens: Sequence[Token]) -> List[Tuple[int, int]]:
    """(start, end) token index ranges of function bodies.

    A body is a depth-0 '{' directly preceded by ')'. Falls back to the whole
    stream when no function boundary is recognizable (loose snippets).
    """
    scopes: List[Tuple[int, int]] = []
    depth = 0
    idx = 0
    while idx < len(tokens):
        tok = tokens[idx]
        if tok.kind == PUNCT and tok.value == "{":
            if depth == 0 and idx > 0 and tokens[idx - 1].value == ")":
                # find matching close brace
                inner = 0
                end = len(tokens)
                for j in range(idx, len(tokens)):
                    if tokens[j].kind == PUNCT and tokens[j].value == "{":
                        inner += 1
                    elif tokens[j].kind == PUNCT and tokens[j].value == "}":
                        inner -= 1
                        if inner == 0:
                            end = j
                            break
                scopes.append((idx + 1, end))
                idx = end + 1
                depth = 0
                continue
            depth += 1
        elif tok.kind == PUNCT and tok.value == "}":
            depth = max(0, depth - 1)
        idx += 1
    if not scopes:
        scopes.append((0, len(tokens)))
    return scopes


# --- format-string rule ------------------------------------------------------

_LENGTH_MODIFIERS = set("hlLjzt")

# Position of the format-string argument per call.
_SCANF_FORMAT_ARG = {"scanf": 0, "fscanf": 1, "sscanf": 1, "vscanf": 0}


def has_unbounded_string_conversion(fmt: str) -> bool:
    """True when the format contains a ``%s`` with no field width (and no '*')."""
    i, n = 0, len(fmt)
    while i < n:
        if fmt[i] != "%":
            i += 1
            continue
        i += 1
        if i >= n:
            break
        if fmt[i] == "%":
            i += 1
            continue
        suppressed = fmt[i] == "*"
        if suppressed:
            i += 1
        width = False
        while i < n and fmt[i].isdigit():
            width = True
            i += 1
        while i < n and fmt[i] in _LENGTH_MODIFIERS:
            i += 1
        if i >= n:
            break
        conv = fmt[i]
        if conv == "s" and not width and not suppressed:
            return True
        if conv == "[":
            # skip the scanset so its contents are not misread as conversions
            i += 1
            if i < n and fmt[i] == "^":
                i += 1
            if i < n and fmt[i] == "]":
                i += 1
            while i < n and fmt[i] != "]":
                i += 1
        i += 1
    return False


def _format_literal(arg_tokens: Sequence[Token]) -> Optional[str]:
    # Adjacent string literals concatenate, as in C.
    parts = [tok.value for tok in arg_tokens if tok.kind == STR]
    if not parts or any(tok.kind != STR for tok in arg_tokens):
        return None
    return "".join(parts)


def _rule_scanf(tokens: Sequence[Token], hits: List[Tuple[int, str]]) -> None:
    for idx, tok in enumerate(tokens):
        if tok.kind != ID or tok.value not in _SCANF_FORMAT_ARG:
            continue
        if idx + 1 >= len(tokens) or tokens[idx + 1].value != "(":
            continue
        args, _ = _split_call_args(tokens, idx + 1)
        fmt_index = _SCANF_FORMAT_ARG[tok.value]
        if fmt_index >= len(args):
            continue
        fmt = _format_literal(args[fmt_index])
        if fmt is not None and has_unbounded_string_conversion(fmt):
            hits.append((tok.line, "scanf-unbounded"))


def _rule_gets(tokens: Sequence[Token], hits: List[Tuple[int, str]]) -> None:
    for idx, tok in enumerate(tokens):
        if (
            tok.kind == ID
            and tok.value == "gets"
            and idx + 1 < len(tokens)
            and tokens[idx + 1].value == "("
        ):
            hits.append((tok.line, "gets-call"))


# --- per-function resource rules ----------------------------------------------

_CONTROL_KEYWORDS = {"if", "while", "for", "switch", "return", "sizeof"}


def _find_assignments(tokens: Sequence[Token], callees: set) -> List[Tuple[str, int, int, int]]:
    """Occurrences of ``var = [cast] callee(...)``.

    Returns (var, line, call_open_idx, call_close_idx) tuples.
    """
    found = []
    for idx, tok in enumerate(tokens):
        if tok.kind != ID or tok.value not in callees:
            continue
        if idx + 1 >= len(tokens) or tokens[idx + 1].value != "(":
            continue
        close = _match_paren(tokens, idx + 1)
        j = idx - 1
        # allow one parenthesized cast between '=' and the call
        if j >= 0 and tokens[j].value == ")":
            depth = 0
            while j >= 0:
                if tokens[j].value == ")":
                    depth += 1
                elif tokens[j].value == "(":
                    depth -= 1
                    if depth == 0:
                        j -= 1
                        break
                j -= 1
        if j >= 1 and tokens[j].value == "=" and tokens[j - 1].kind == ID:
            found.append((tokens[j - 1].value, tok.line, idx + 1, close))
        else:
            found.append(("", tok.line, idx + 1, close))
    return found


def _enclosing_call_is(tokens: Sequence[Token], idx: int, names: set) -> bool:
    """True when tokens[idx] sits inside the argument list of a call to one of names."""
    depth = 0
    for j in range(idx - 1, -1, -1):
        value = tokens[j].value
        if tokens[j].kind == PUNCT:
            if value == ")":
                depth += 1
            elif value == "(":
                if depth == 0:
                    return (
                        j > 0
                        and tokens[j - 1].kind == ID
                        and tokens[j - 1].value in names
                    )
                depth -= 1
    return False


def _is_plain_call_argument(tokens: Sequence[Token], idx: int) -> bool:
    """True when tokens[idx] is inside a non-control call's argument list."""
    depth = 0
    for j in range(idx - 1, -1, -1):
        value = tokens[j].value
        if tokens[j].kind == PUNCT:
            if value == ")":
                depth += 1
            elif value == "(":
                if depth == 0:
                    return (
                        j > 0
                        and tokens[j - 1].kind == ID
                        and tokens[j - 1].value not in _CONTROL_KEYWORDS
                    )
                depth -= 1
    return False


def _rule_fopen_null(tokens: Sequence[Token], hits: List[Tuple[int, str]]) -> None:
    for var, _line, _open_idx, close in _find_assignments(tokens, {"fopen"}):
        if not var:
            continue
        # `if ((fp = fopen(...)) == NULL)` checks immediately after the call
        after = close + 1
        while after < len(tokens) and tokens[after].value == ")":
            after += 1
        if after < len(tokens) and tokens[after].value in ("==", "!="):
            continue
        checked = False
        for idx in range(close + 1, len(tokens)):
            tok = tokens[idx]
            if tok.kind != ID or tok.value != var:
                continue
            prev = tokens[idx - 1] if idx > 0 else None
            nxt = tokens[idx + 1] if idx + 1 < len(tokens) else None
            if prev is not None and prev.value in ("!", "==", "!="):
                checked = True
                break
            if nxt is not None and nxt.value in ("==", "!="):
                checked = True
                break
            if (
                prev is not None
                and prev.value == "("
                and idx >= 2
                and tokens[idx - 2].value in ("if", "while")
                and nxt is not None
                and nxt.value == ")"
            ):
                checked = True
                break
            if nxt is not None and nxt.value == "=":
                break  # reassigned; stop tracking
            if prev is not None and prev.value == "return":
                break  # handed to the caller
            if (prev is not None and prev.value == "*") or (
                nxt is not None and nxt.value == "->"
            ):
                hits.append((tok.line, "fopen-null-deref"))
                break
            if _is_plain_call_argument(tokens, idx):
                hits.append((tok.line, "fopen-null-deref"))
                break
        if checked:
            continue


def _rule_fopen_leak(tokens: Sequence[Token], hits: List[Tuple[int, str]]) -> None:
    for var, line, open_idx, _close in _find_assignments(tokens, {"fopen"}):
        if not var:
            # tolerate the direct fclose(fopen(...)) idiom
            if _enclosing_call_is(tokens, open_idx - 1, {"fclose"}):
                continue
            hits.append((line, "fopen-leak"))
            continue
        closed = any(
            tok.kind == ID
            and tok.value == var
            and _enclosing_call_is(tokens, idx, {"fclose"})
            for idx, tok in enumerate(tokens)
        )
        if not closed:
            hits.append((line, "fopen-leak"))


def _rule_alloc_leak(tokens: Sequence[Token], hits: List[Tuple[int, str]]) -> None:
    for var, line, _open_idx, close in _find_assignments(tokens, {"malloc", "calloc"}):
        if not var:
            continue
        freed = False
        returned = False
        for idx in range(close + 1, len(tokens)):
            tok = tokens[idx]
            if tok.kind != ID or tok.value != var:
                continue
            if _enclosing_call_is(tokens, idx, {"free", "realloc"}):
                freed = True
                break
            if idx > 0 and tokens[idx - 1].value == "return":
                returned = True
                break
        if not freed and not returned:
            hits.append((line, "alloc-leak"))


def run_builtin(source: str, file_name: str = "<input>") -> AnalysisReport:
    """Apply every built-in rule to the source text. Deterministic, total."""
    tokens = tokenize(source)

    hits: List[Tuple[int, str]] = []
    _rule_scanf(tokens, hits)
    _rule_gets(tokens, hits)
    for start, end in _function_scopes(tokens):
        body = tokens[start:end]
        _rule_fopen_null(body, hits)
        _rule_fopen_leak(body, hits)
        _rule_alloc_leak(body, hits)

    diagnostics = []
    for line, rule_id in sorted(set(hits)):
        rule = _RULES_BY_ID[rule_id]
        diagnostics.append(
            Diagnostic(
                location=SourceLocation(file=file_name, line=line),
                category=VulnerabilityCategory.from_cwe(rule.cwe),
                message=rule.description,
                analyzer=Analyzer.BUILTIN,
                severity=Severity.ERROR,
            )
        )
    return AnalysisReport(
        diagnostics=tuple(diagnostics),
        analyzers_run=frozenset({Analyzer.BUILTIN}),
    )
