"""Searchable index of solver-API signatures parsed from interface stub files.

Backs the tool-calling loop: exact lookups return the signature and
documentation, near-misses return up to three similarly named members.
"""

from __future__ import annotations

import ast
import json
import logging
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path

logger = logging.getLogger(__name__)

DEFAULT_MAX_SUGGESTIONS = 3
DEFAULT_DISTANCE_THRESHOLD = 0.5


class StubParseError(ValueError):
    def __init__(self, path, line: int | None, message: str):
        self.path = str(path)
        self.line = line
        super().__init__(f"{path}:{line}: {message}")


@dataclass(frozen=True)
class Parameter:
    name: str
    annotation: str = ""
    default: str = ""

    def render(self) -> str:
        text = self.name
        if self.annotation:
            text += f": {self.annotation}"
        if self.default:
            text += f" = {self.default}" if self.annotation else f"={self.default}"
        return text


@dataclass(frozen=True)
class SignatureEntry:
    qualified_name: str
    parameters: tuple[Parameter, ...]
    returns: str = ""
    doc: str = ""

    @property
    def member_name(self) -> str:
        return self.qualified_name.rsplit(".", 1)[-1]

    def format_signature(self) -> str:
        params = ", ".join(p.render() for p in self.parameters)
        text = f"{self.qualified_name}({params})"
        if self.returns:
            text += f" -> {self.returns}"
        return text


@dataclass(frozen=True)
class ToolQuery:
    name: str


class ResultKind(str, Enum):
    FOUND = "Found"
    SUGGESTIONS = "Suggestions"
    EMPTY = "Empty"


@dataclass(frozen=True)
class ToolResult:
    kind: ResultKind
    entry: SignatureEntry | None = None
    suggestions: tuple[str, ...] = ()


@dataclass
class SignatureIndex:
    entries: dict[str, SignatureEntry]

    def member_names(self) -> list[str]:
        seen = []
        for entry in self.entries.values():
            if entry.member_name not in seen:
                seen.append(entry.member_name)
        return seen


def _unparse(node) -> str:
    return "" if node is None else ast.unparse(node)


def _parameters(fn: ast.FunctionDef, drop_self: bool) -> tuple[Parameter, ...]:
    args = fn.args
    params: list[Parameter] = []

    positional = list(args.posonlyargs) + list(args.args)
    defaults: list = [None] * (len(positional) - len(args.defaults)) + list(args.defaults)
    for arg, default in zip(positional, defaults):
        params.append(Parameter(arg.arg, _unparse(arg.annotation), _unparse(default)))
    if args.vararg:
        params.append(Parameter(f"*{args.vararg.arg}", _unparse(args.vararg.annotation)))
    elif args.kwonlyargs:
        params.append(Parameter("*"))
    for arg, default in zip(args.kwonlyargs, args.kw_defaults):
        params.append(Parameter(arg.arg, _unparse(arg.annotation), _unparse(default)))
    if args.kwarg:
        params.append(Parameter(f"**{args.kwarg.arg}", _unparse(args.kwarg.annotation)))

    if drop_self and params and params[0].name in ("self", "cls"):
        params = params[1:]
    return tuple(params)


def _add_entry(entries: dict, entry: SignatureEntry) -> None:
    if entry.qualified_name in entries:
        logger.warning("duplicate declaration of %s; keeping the later one", entry.qualified_name)
    entries[entry.qualified_name] = entry


def build_index(stub_paths) -> SignatureIndex:
    """One SignatureEntry per declared function or method; class members are dot-qualified."""
    entries: dict[str, SignatureEntry] = {}
    for path in stub_paths:
        path = Path(path)
        text = path.read_text(encoding="utf-8")
        try:
            module = ast.parse(text, filename=str(path))
        except SyntaxError as exc:
            raise StubParseError(path, exc.lineno, exc.msg) from exc
        for node in module.body:
            if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
                _add_entry(entries, SignatureEntry(
                    node.name, _parameters(node, drop_self=False),
                    _unparse(node.returns), ast.get_docstring(node) or ""))
            elif isinstance(node, ast.ClassDef):
                for member in node.body:
                    if isinstance(member, (ast.FunctionDef, ast.AsyncFunctionDef)):
                        _add_entry(entries, SignatureEntry(
                            f"{node.name}.{member.name}", _parameters(member, drop_self=True),
                            _unparse(member.returns), ast.get_docstring(member) or ""))
    return SignatureIndex(entries)


def levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + (ca != cb)))
        previous = current
    return previous[-1]


def _normalized_distance(a: str, b: str) -> float:
    longest = max(len(a), len(b))
    if longest == 0:
        return 0.0
    return levenshtein(a, b) / longest


def lookup(index: SignatureIndex, name: str,
           max_suggestions: int = DEFAULT_MAX_SUGGESTIONS,
           threshold: float = DEFAULT_DISTANCE_THRESHOLD) -> ToolResult:
    """Exact (case-sensitive) match first, then nearby names ranked by edit distance."""
    if name in index.entries:
        return ToolResult(ResultKind.FOUND, entry=index.entries[name])
    matches = sorted(qn for qn, e in index.entries.items() if e.member_name == name)
    if matches:
        return ToolResult(ResultKind.FOUND, entry=index.entries[matches[0]])

    scored = []
    for candidate in index.member_names():
        distance = _normalized_distance(name, candidate)
        if distance <= threshold:
            scored.append((distance, candidate))
    scored.sort()
    if scored:
        return ToolResult(ResultKind.SUGGESTIONS,
                          suggestions=tuple(c for _, c in scored[:max_suggestions]))
    return ToolResult(ResultKind.EMPTY)


def render_tool_result(result: ToolResult) -> str:
    """Deterministic plain-text block injected as the tool turn."""
    if result.kind == ResultKind.FOUND:
        doc = result.entry.doc or "(no documentation)"
        return f"SIGNATURE: {result.entry.format_signature()}\nDOC: {doc}"
    if result.kind == ResultKind.SUGGESTIONS:
        return f"Did you mean: {', '.join(result.suggestions)}"
    return "No such member"


def index_to_json(index: SignatureIndex) -> str:
    payload = {
        qn: {
            "parameters": [[p.name, p.annotation, p.default] for p in entry.parameters],
            "returns": entry.returns,
            "doc": entry.doc,
        }
        for qn, entry in index.entries.items()
    }
    return json.dumps(payload, indent=2, sort_keys=True)


def index_from_json(text: str) -> SignatureIndex:
    payload = json.loads(text)
    entries = {
        qn: SignatureEntry(
            qn,
            tuple(Parameter(n, a, d) for n, a, d in spec["parameters"]),
            spec.get("returns", ""),
            spec.get("doc", ""),
        )
        for qn, spec in payload.items()
    }
    return SignatureIndex(entries)


def bundled_stub_path() -> Path:
    with resources.as_file(resources.files("orbench").joinpath("data/stubs/coptpy.pyi")) as path:
        return path
