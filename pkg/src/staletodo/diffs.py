"""Unified diff parsing and normalization.

Turns the textual diff of a commit into a line-tagged document and applies
the text normalization used everywhere downstream: lowercasing, commit-id
and issue-id placeholders, first-sentence truncation of commit messages,
and the 1MB oversize filter.

The parser targets diffs as emitted by ``git log -p`` / ``git show``. It
keeps only hunk body lines; file headers, hunk headers, mode/index lines
and binary-file notices are metadata and never become content lines.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Optional

MAX_DIFF_BYTES = 1_048_576  # oversize commits carry no usable signal

COMMIT_ID_PLACEHOLDER = "<commit_id>"
ISSUE_ID_PLACEHOLDER = "<issue_id>"

# A maximal 7-40 char hex run containing at least one digit. The digit
# requirement keeps ordinary words ("deedded") intact while still catching
# real short/long git hashes. \b enforces both word delimitation and
# maximality: longer hex runs have no interior boundary to anchor on.
_HEX_RUN_RE = re.compile(r"\b(?=[0-9a-f]*\d)[0-9a-f]{7,40}\b")
_ISSUE_REF_RE = re.compile(r"#\d+")
_SENTENCE_END_RE = re.compile(r"\.(?=\s|$)")

_HUNK_HEADER_RE = re.compile(
    r"^@@ -(?P<old_start>\d+)(?:,(?P<old_count>\d+))?"
    r" \+(?P<new_start>\d+)(?:,(?P<new_count>\d+))? @@"
)
_FILE_HEADER_RE = re.compile(r"^diff --git a/(?P<old>.*) b/(?P<new>.*)$")


class MalformedDiff(ValueError):
    """A hunk body line without a valid +/-/space marker."""

    def __init__(self, line_no: int, text: str):
        self.line_no = line_no
        self.text = text
        super().__init__(f"line {line_no}: not a valid hunk body line: {text!r}")


class LineKind(Enum):
    ADDED = "added"
    REMOVED = "removed"
    CONTEXT = "context"


_MARKER_TO_KIND = {"+": LineKind.ADDED, "-": LineKind.REMOVED, " ": LineKind.CONTEXT}
_KIND_TO_MARKER = {LineKind.ADDED: "+", LineKind.REMOVED: "-", LineKind.CONTEXT: " "}


@dataclass(frozen=True)
class RawCommit:
    """One repository revision as mined from the history."""

    commit_id: str
    message: str
    diff_text: str
    repo: str = ""


@dataclass(frozen=True)
class DiffLine:
    """A single hunk body line with its marker stripped."""

    kind: LineKind
    text: str
    file_index: int
    hunk_index: int
    position: int

    def marker(self) -> str:
        return _KIND_TO_MARKER[self.kind]


@dataclass(frozen=True)
class DiffDocument:
    """Ordered content lines of a diff plus file paths and original size."""

    lines: tuple[DiffLine, ...]
    byte_size: int
    files: tuple[tuple[Optional[str], Optional[str]], ...]


@dataclass(frozen=True)
class NormalizedMessage:
    """Lowercased first sentence of a commit message, with placeholders."""

    text: str


def parse_unified_diff(diff_text: str) -> DiffDocument:
    """Parse unified diff text into a DiffDocument.

    Empty input yields an empty document. Metadata lines (file and hunk
    headers, index/mode lines, binary notices, "\\ No newline" markers) are
    skipped; every hunk body line becomes exactly one DiffLine. Hunk bodies
    are delimited by the line counts declared in the hunk header, so body
    lines that happen to start with "---" are never mistaken for headers.

    Raises MalformedDiff when a hunk body line carries no valid marker.
    """
    byte_size = len(diff_text.encode("utf-8", errors="surrogateescape"))
    lines: list[DiffLine] = []
    files: list[tuple[Optional[str], Optional[str]]] = []

    file_index = -1
    hunk_index = -1
    position = 0
    remaining_old = 0
    remaining_new = 0

    for line_no, raw in enumerate(diff_text.splitlines(), start=1):
        in_hunk = remaining_old > 0 or remaining_new > 0

        if in_hunk:
            if raw.startswith("\\"):
                continue  # "\ No newline at end of file"
            marker = raw[0] if raw else " "
            kind = _MARKER_TO_KIND.get(marker)
            if kind is None:
                raise MalformedDiff(line_no, raw)
            if kind is not LineKind.ADDED:
                remaining_old -= 1
            if kind is not LineKind.REMOVED:
                remaining_new -= 1
            text = raw[1:] if raw else ""
            lines.append(DiffLine(kind, text, file_index, hunk_index, position))
            position += 1
            continue

        header = _FILE_HEADER_RE.match(raw)
        if header:
            file_index += 1
            hunk_index = -1
            files.append((header.group("old"), header.group("new")))
            continue

        hunk = _HUNK_HEADER_RE.match(raw)
        if hunk and file_index >= 0:
            hunk_index += 1
            position = 0
            remaining_old = int(hunk.group("old_count") or "1")
            remaining_new = int(hunk.group("new_count") or "1")
            continue

        if raw.startswith("--- ") and file_index >= 0:
            old = raw[4:].strip()
            _refine_path(files, file_index, old=old)
            continue
        if raw.startswith("+++ ") and file_index >= 0:
            new = raw[4:].strip()
            _refine_path(files, file_index, new=new)
            continue

        # index/mode/similarity/binary lines and any leading preamble
        continue

    return DiffDocument(lines=tuple(lines), byte_size=byte_size, files=tuple(files))


def _refine_path(
    files: list[tuple[Optional[str], Optional[str]]],
    file_index: int,
    old: Optional[str] = None,
    new: Optional[str] = None,
) -> None:
    cur_old, cur_new = files[file_index]
    if old is not None:
        cur_old = None if old == "/dev/null" else old[2:] if old.startswith("a/") else old
    if new is not None:
        cur_new = None if new == "/dev/null" else new[2:] if new.startswith("b/") else new
    files[file_index] = (cur_old, cur_new)


def normalize_diff(doc: DiffDocument) -> Optional[DiffDocument]:
    """Lowercase line text and placeholder commit ids; filter oversize diffs.

    Returns None (rejected) when the original diff exceeded 1MB; that is a
    data-filter signal, not a failure. Lowercasing happens before
    substitution, so uppercase hashes are caught too; the operation is
    idempotent because the placeholders contain no hex run.
    """
    if doc.byte_size > MAX_DIFF_BYTES:
        return None
    lines = tuple(replace(line, text=normalize_text(line.text)) for line in doc.lines)
    return replace(doc, lines=lines)


def normalize_text(text: str) -> str:
    return _HEX_RUN_RE.sub(COMMIT_ID_PLACEHOLDER, text.lower())


def normalize_message(message: str) -> NormalizedMessage:
    """Reduce a commit message to its normalized first sentence.

    The sentence boundary is the first period followed by whitespace or end
    of text (the period is kept), or the first newline, whichever comes
    first. Issue references ("#123") and 7-40 char hex runs become
    placeholders. Empty input yields an empty message; callers decide
    whether to drop the sample.
    """
    text = message.lower()
    end = len(text)
    match = _SENTENCE_END_RE.search(text)
    if match:
        end = match.end()
    newline = text.find("\n")
    if newline != -1 and newline < end:
        end = newline
    text = text[:end]
    text = _ISSUE_REF_RE.sub(ISSUE_ID_PLACEHOLDER, text)
    text = _HEX_RUN_RE.sub(COMMIT_ID_PLACEHOLDER, text)
    return NormalizedMessage(text.strip())


def line_scopes(
    doc: DiffDocument,
) -> tuple[list[DiffLine], list[DiffLine], list[DiffLine]]:
    """Partition document lines into (added, removed, equal)."""
    added = [line for line in doc.lines if line.kind is LineKind.ADDED]
    removed = [line for line in doc.lines if line.kind is LineKind.REMOVED]
    equal = [line for line in doc.lines if line.kind is LineKind.CONTEXT]
    return added, removed, equal


def render_lines(lines: Iterable[DiffLine]) -> str:
    """Flatten diff lines back to marker-prefixed text."""
    return "\n".join(f"{line.marker()}{line.text}" for line in lines)
