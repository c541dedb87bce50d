"""Scanning a live repository for obsolete TODO comments.

Every historical commit is rebuilt into a triple exactly like corpus
construction, but only context-line TODOs qualify: a TODO that a commit
resolved while leaving the comment untouched is the obsolete candidate.
Candidates the classifier marks resolved are then checked against HEAD:
comments still present are potential obsolete findings, comments some
later commit deleted are intermediate ones.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import PurePosixPath
from typing import Callable, Iterable, Optional

from .comments import (
    Language,
    TodoComment,
    associate,
    carve_code_change,
    contains_todo,
    extract_comments_by_file,
    iter_line_comments,
    single_todo_filter,
)
from .corpus import TripleSample, label_triple
from .diffs import LineKind, MalformedDiff, normalize_diff, normalize_message, parse_unified_diff
from .metrics import Status
from .mining import mine_repository, run_git

log = logging.getLogger(__name__)

EXTENSION_LANGUAGES = {".py": Language.PYTHON, ".java": Language.JAVA}


class FindingKind(Enum):
    POTENTIAL_OBSOLETE = "potential_obsolete"
    INTERMEDIATE_OBSOLETE = "intermediate_obsolete"


@dataclass(frozen=True)
class ScanFinding:
    file_path: str
    line_no: Optional[int]
    todo_text: str
    commit_id: str
    score: float
    classification: FindingKind


def language_for_path(path: Optional[str]) -> Optional[Language]:
    if not path:
        return None
    return EXTENSION_LANGUAGES.get(PurePosixPath(path).suffix.lower())


def normalize_ws(text: str) -> str:
    return " ".join(text.split())


@dataclass(frozen=True)
class _Candidate:
    sample: TripleSample
    file_path: Optional[str]
    score: float


def candidate_triples(
    commits: Iterable, context_lines: int = 3
) -> list[tuple[TripleSample, TodoComment, Optional[str]]]:
    """Context-line TODO triples from a commit stream, with their file."""
    out = []
    for commit in commits:
        if "todo" not in commit.diff_text.lower():
            continue
        try:
            doc = parse_unified_diff(commit.diff_text)
        except MalformedDiff as exc:
            log.warning("skipping commit %s: %s", commit.commit_id, exc)
            continue
        norm = normalize_diff(doc)
        if norm is None:
            continue
        file_languages = {
            i: lang
            for i, (old, new) in enumerate(norm.files)
            if (lang := language_for_path(new or old)) is not None
        }
        comments = extract_comments_by_file(norm, file_languages)
        todos = [
            TodoComment(text=text, line=line, language=lang)
            for line, text, lang in comments
            if contains_todo(text)
        ]
        todo = single_todo_filter(todos)
        if todo is None or todo.line.kind is not LineKind.CONTEXT:
            continue
        if not associate(todo, norm, context_lines):
            continue
        cc = carve_code_change(norm, todo)
        if not cc.rendered.strip():
            continue
        msg = normalize_message(commit.message)
        if not msg.text:
            continue
        sample = label_triple(todo, cc, msg, repo=commit.repo, commit_id=commit.commit_id)
        if sample is None:
            continue
        old, new = norm.files[todo.line.file_index]
        out.append((sample, todo, new or old))
    return out


def _head_comment_index(repo_path: str) -> dict[str, list[tuple[str, int]]]:
    """Whitespace-normalized comment text -> [(file, line_no)] at HEAD."""
    listing = run_git(repo_path, ["ls-tree", "-r", "--name-only", "HEAD"])
    index: dict[str, list[tuple[str, int]]] = {}
    for path in listing.splitlines():
        language = language_for_path(path)
        if language is None:
            continue
        content = run_git(repo_path, ["show", f"HEAD:{path}"])
        for line_no, line in enumerate(content.splitlines(), start=1):
            for span in iter_line_comments(line.lower(), language):
                key = normalize_ws(span.text)
                if key:
                    index.setdefault(key, []).append((path, line_no))
    return index


def scan_repository(
    repo_path: str,
    predictor: Callable[[TripleSample], object],
    context_lines: int = 3,
) -> list[ScanFinding]:
    """Find TODO comments some commit resolved but nobody removed.

    predictor maps a TripleSample to a Prediction (or anything with score
    and status attributes). The scan never writes to the repository.
    """
    commits = mine_repository(repo_path)
    triples = candidate_triples(commits, context_lines)

    resolved: dict[str, _Candidate] = {}
    for sample, todo, file_path in triples:
        prediction = predictor(sample)
        status = getattr(prediction, "status", prediction)
        if status is not Status.RESOLVED:
            continue
        score = float(getattr(prediction, "score", 1.0))
        key = normalize_ws(sample.todo_comment)
        current = resolved.get(key)
        if current is None or score > current.score:
            resolved[key] = _Candidate(sample=sample, file_path=file_path, score=score)

    if not resolved:
        return []

    head_index = _head_comment_index(repo_path)
    findings = []
    for key, candidate in resolved.items():
        hits = head_index.get(key)
        if hits:
            path, line_no = hits[0]
            findings.append(
                ScanFinding(
                    file_path=path,
                    line_no=line_no,
                    todo_text=candidate.sample.todo_comment,
                    commit_id=candidate.sample.commit_id,
                    score=candidate.score,
                    classification=FindingKind.POTENTIAL_OBSOLETE,
                )
            )
        else:
            findings.append(
                ScanFinding(
                    file_path=candidate.file_path or "",
                    line_no=None,
                    todo_text=candidate.sample.todo_comment,
                    commit_id=candidate.sample.commit_id,
                    score=candidate.score,
                    classification=FindingKind.INTERMEDIATE_OBSOLETE,
                )
            )
    findings.sort(key=lambda f: -f.score)
    return findings


def finding_record(finding: ScanFinding) -> dict:
    return {
        "file_path": finding.file_path,
        "line_no": finding.line_no,
        "todo_text": finding.todo_text,
        "commit_id": finding.commit_id,
        "score": finding.score,
        "classification": finding.classification.value,
    }


def write_findings(findings: Iterable[ScanFinding], path: str) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for finding in findings:
            fh.write(json.dumps(finding_record(finding), ensure_ascii=False) + "\n")
            count += 1
    return count
