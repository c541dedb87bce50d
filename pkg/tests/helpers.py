"""Shared builders for tests: documents, samples, synthetic corpora."""

from __future__ import annotations

import random
import subprocess
from pathlib import Path

import numpy as np

from staletodo.corpus import Label, TripleSample
from staletodo.diffs import DiffDocument, DiffLine, LineKind
from staletodo.model import bce_loss, forward, init_mlp, mean_pool, mlp_backward
from staletodo.model.network import embedding_gradient

KIND_BY_CHAR = {"+": LineKind.ADDED, "-": LineKind.REMOVED, " ": LineKind.CONTEXT}


def make_line(kind_char, text, file_index=0, hunk_index=0, position=0):
    return DiffLine(KIND_BY_CHAR[kind_char], text, file_index, hunk_index, position)


def make_doc(specs, byte_size=100, files=(("a.py", "a.py"),)):
    """One-file one-hunk document from [(marker_char, text), ...]."""
    lines = tuple(
        make_line(ch, text, position=i) for i, (ch, text) in enumerate(specs)
    )
    return DiffDocument(lines=lines, byte_size=byte_size, files=tuple(files))


def make_sample(
    cc="+x = 1",
    td="todo: fix it",
    msg="fix it.",
    label=Label.NEGATIVE,
    repo="test",
    commit_id="c000001",
):
    kind = LineKind.REMOVED if label is Label.POSITIVE else LineKind.CONTEXT
    return TripleSample(
        code_change=cc,
        todo_comment=td,
        commit_msg=msg,
        label=label,
        repo=repo,
        commit_id=commit_id,
        todo_line_kind=kind,
    )


# Vocabulary pools for the synthetic separable corpus. Positives plant the
# same resolution verb/object in comment, change and message; negatives use
# disjoint noise words in change and message.
RESOLVE_VERBS = (
    "flush", "retry", "log", "cache", "parse", "close", "merge", "purge",
    "trace", "batch",
)
OBJECTS = (
    "queue", "socket", "buffer", "token", "record", "stream", "config",
    "index", "handle", "worker",
)
NOISE_WORDS = (
    "alpha", "omega", "delta", "pivot", "quartz", "ember", "fable", "grain",
    "harbor", "inlet", "jetty", "kernel", "lantern", "meadow",
)


def make_separable_triple(rng: random.Random, positive: bool, serial: int) -> TripleSample:
    verb = rng.choice(RESOLVE_VERBS)
    obj = rng.choice(OBJECTS)
    todo = f"todo: {verb} the {obj}"
    filler = rng.choice(NOISE_WORDS)
    if positive:
        cc_lines = [
            f" def handle_{obj}():",
            f"+    {obj}.{verb}()",
            f"+    {verb}_done = True".lower(),
            f" {filler} = 1",
        ]
        msg = f"{verb} the {obj} properly."
        label = Label.POSITIVE
    else:
        w1, w2 = rng.sample(NOISE_WORDS, 2)
        cc_lines = [
            f" def handle_{obj}():",
            f"+    {w1} = {w2}",
            f"-    {w1} = 0",
            f" {filler} = 1",
        ]
        msg = f"update {w1} handling."
        label = Label.NEGATIVE
    return TripleSample(
        code_change="\n".join(cc_lines),
        todo_comment=todo,
        commit_msg=msg,
        label=label,
        repo="synthetic",
        commit_id=f"c{serial:06d}",
        todo_line_kind=LineKind.REMOVED if positive else LineKind.CONTEXT,
    )


def make_separable_corpus(n: int, seed: int) -> list[TripleSample]:
    rng = random.Random(seed)
    return [make_separable_triple(rng, positive=i % 2 == 0, serial=i) for i in range(n)]


def random_text(rng: random.Random, words=NOISE_WORDS, lo=1, hi=6) -> str:
    return " ".join(rng.choice(words) for _ in range(rng.randint(lo, hi)))


def random_sample(rng: random.Random, serial: int = 0) -> TripleSample:
    """Unstructured sample for truth-table style property tests."""
    pool = RESOLVE_VERBS + OBJECTS + NOISE_WORDS
    label = rng.choice((Label.POSITIVE, Label.NEGATIVE))
    return TripleSample(
        code_change="+" + random_text(rng, pool),
        todo_comment="todo " + random_text(rng, pool, 1, 4),
        commit_msg=random_text(rng, pool, 1, 4) + ".",
        label=label,
        repo="rand",
        commit_id=f"r{serial:06d}",
        todo_line_kind=LineKind.REMOVED if label is Label.POSITIVE else LineKind.CONTEXT,
    )


GIT_BASE_ENV = {
    "GIT_AUTHOR_NAME": "Fixture Author",
    "GIT_AUTHOR_EMAIL": "fixture@example.com",
    "GIT_COMMITTER_NAME": "Fixture Author",
    "GIT_COMMITTER_EMAIL": "fixture@example.com",
    "GIT_CONFIG_GLOBAL": "/dev/null",
    "GIT_CONFIG_SYSTEM": "/dev/null",
    "GIT_CONFIG_NOSYSTEM": "1",
}


def git(repo: Path, *args: str, date: str | None = None) -> str:
    env = dict(GIT_BASE_ENV)
    env["PATH"] = "/usr/bin:/bin:/usr/local/bin"
    if date:
        env["GIT_AUTHOR_DATE"] = date
        env["GIT_COMMITTER_DATE"] = date
    proc = subprocess.run(
        ["git", "-C", str(repo), *args],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    return proc.stdout


def init_repo(path: Path) -> Path:
    path.mkdir(parents=True, exist_ok=True)
    git(path, "init", "-q")
    return path


def commit_all(repo: Path, message: str, serial: int) -> str:
    """Stage everything and commit with a pinned date; returns the hash."""
    date = f"2021-01-01T00:00:{serial:02d} +0000"
    git(repo, "add", "-A")
    git(repo, "commit", "-q", "-m", message, date=date)
    return git(repo, "rev-parse", "HEAD").strip()


def gradient_check_instance(seed: int, fd_step: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients
    on one random small model instance (three encoders plus MLP)."""
    rng = np.random.default_rng(seed)
    vocab_size = int(rng.integers(5, 10))
    dim = int(rng.integers(2, 9))
    hidden = tuple(int(rng.integers(2, 9)) for _ in range(3))
    batch = int(rng.integers(1, 4))
    max_len = 5

    tables = [rng.uniform(-0.5, 0.5, size=(vocab_size, dim)) for _ in range(3)]
    ids = [rng.integers(0, vocab_size, size=(batch, max_len)) for _ in range(3)]
    mlp = init_mlp(rng, dim * 3, hidden, dropout_rate=0.0)
    # zero-init biases would park ReLU preactivations exactly on the kink
    # (non-differentiable, FD invalid); check at a generic point instead
    for b in mlp.biases:
        b += rng.uniform(-0.3, 0.3, size=b.shape)
    labels = rng.integers(0, 2, size=batch).astype(float)

    def loss_and_cache():
        hs = [mean_pool(ids[i], tables[i]) for i in range(3)]
        scores, cache = forward(hs[0], hs[1], hs[2], mlp, train_mode=False)
        return bce_loss(scores, labels), cache

    _, cache = loss_and_cache()
    grads, d_input = mlp_backward(mlp, cache, labels)
    emb_grads = [
        embedding_gradient(d_input[:, i * dim : (i + 1) * dim], ids[i], vocab_size, dim)
        for i in range(3)
    ]
    params = list(mlp.weights) + list(mlp.biases) + tables
    analytic = list(grads.mlp_w) + list(grads.mlp_b) + emb_grads

    worst = 0.0
    for p, g in zip(params, analytic):
        it = np.nditer(p, flags=["multi_index"])
        for _ in it:
            index = it.multi_index
            original = p[index]
            p[index] = original + fd_step
            up, _ = loss_and_cache()
            p[index] = original - fd_step
            down, _ = loss_and_cache()
            p[index] = original
            fd = (up - down) / (2.0 * fd_step)
            a = float(g[index])
            err = abs(a - fd) / max(abs(a), abs(fd), 1e-5)
            worst = max(worst, err)
    return worst
