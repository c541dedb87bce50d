"""Model container files and the external-embedding interchange format.

The model file is a numpy .npz archive: arrays stay bit-exact and a JSON
header carries the vocabulary, the config echo and a format version.

External vectors live in a newline-delimited text file, one record per
line: a lowercase sha256 hex digest of the exact normalized text, then 768
space-separated decimal reals. Values are written with repr, so float64
round-trips exactly.
"""

from __future__ import annotations

import hashlib
import io
import json
from typing import Iterable, Mapping, Optional

import numpy as np

FORMAT_VERSION = 1
EXTERNAL_DIM = 768


class MissingExternalVector(KeyError):
    def __init__(self, digest: str):
        self.text_hash = digest
        super().__init__(f"no external vector for text hash {digest}")


class ModelFileError(ValueError):
    pass


class VectorFileError(ValueError):
    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {reason}")


def text_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class ExternalVectorStore:
    """Lookup of precomputed encoder outputs keyed by text hash."""

    def __init__(self, vectors: Optional[Mapping[str, np.ndarray]] = None):
        self._vectors: dict[str, np.ndarray] = dict(vectors or {})

    def __len__(self) -> int:
        return len(self._vectors)

    def add(self, text: str, vector: np.ndarray) -> None:
        self._vectors[text_hash(text)] = np.asarray(vector, dtype=float)

    def lookup(self, text: str) -> np.ndarray:
        digest = text_hash(text)
        try:
            return self._vectors[digest]
        except KeyError:
            raise MissingExternalVector(digest) from None

    @classmethod
    def read(cls, path: str) -> "ExternalVectorStore":
        vectors: dict[str, np.ndarray] = {}
        with open(path, "r", encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                fields = line.split()
                if len(fields) != 1 + EXTERNAL_DIM:
                    raise VectorFileError(
                        line_no,
                        f"expected hash + {EXTERNAL_DIM} values, got {len(fields)} fields",
                    )
                digest = fields[0].lower()
                try:
                    values = np.array([float(v) for v in fields[1:]])
                except ValueError as exc:
                    raise VectorFileError(line_no, f"bad value: {exc}") from exc
                vectors[digest] = values
        return cls(vectors)


def write_external_vectors(path: str, records: Iterable[tuple[str, np.ndarray]]) -> int:
    """Write (text, vector) pairs; returns the record count."""
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for text, vector in records:
            vector = np.asarray(vector, dtype=float)
            if vector.shape != (EXTERNAL_DIM,):
                raise ValueError(f"vector must have shape ({EXTERNAL_DIM},), got {vector.shape}")
            fh.write(text_hash(text) + " " + " ".join(repr(float(v)) for v in vector) + "\n")
            count += 1
    return count


def save_model(model, path: str) -> None:
    from .network import COMPONENT_ORDER  # local import avoids a cycle

    config = model.config
    meta = {
        "format_version": FORMAT_VERSION,
        "vocab": list(model.vocab.tokens),
        "config": {
            "batch_size": config.batch_size,
            "learning_rate": config.learning_rate,
            "grad_clip_norm": config.grad_clip_norm,
            "validate_every": config.validate_every,
            "max_epochs": config.max_epochs,
            "seed": config.seed,
            "component_mask": sorted(c.value for c in config.component_mask),
            "backend": config.backend,
            "dim": config.dim,
            "min_freq": config.min_freq,
            "max_len_cc": config.max_len_cc,
            "max_len_td": config.max_len_td,
            "max_len_msg": config.max_len_msg,
            "hidden_sizes": list(config.hidden_sizes) if config.hidden_sizes else None,
            "dropout_rate": config.dropout_rate,
        },
        "n_layers": len(model.mlp.weights),
        "encoders": [c.value for c in COMPONENT_ORDER if c in model.encoders],
        "has_adam": model.adam is not None,
    }
    arrays: dict[str, np.ndarray] = {}
    for i, (w, b) in enumerate(zip(model.mlp.weights, model.mlp.biases)):
        arrays[f"mlp_w{i}"] = w
        arrays[f"mlp_b{i}"] = b
    for component in COMPONENT_ORDER:
        if component in model.encoders:
            arrays[f"emb_{component.value}"] = model.encoders[component].embedding
    if model.adam is not None:
        meta["adam_t"] = model.adam.t
        for i, (m, v) in enumerate(zip(model.adam.m, model.adam.v)):
            arrays[f"adam_m{i}"] = m
            arrays[f"adam_v{i}"] = v

    buffer = io.BytesIO()
    np.savez(buffer, meta=np.array(json.dumps(meta)), **arrays)
    with open(path, "wb") as fh:
        fh.write(buffer.getvalue())


def load_model(path: str):
    from .network import Component, EncoderParams, MlpParams
    from .training import ModelParams, TrainConfig
    from .optimizer import AdamState
    from .vocab import make_vocab

    with np.load(path, allow_pickle=False) as archive:
        if "meta" not in archive:
            raise ModelFileError("not a model file: missing meta entry")
        meta = json.loads(str(archive["meta"]))
        if meta.get("format_version") != FORMAT_VERSION:
            raise ModelFileError(
                f"unsupported model format version {meta.get('format_version')!r}"
            )
        cfg = meta["config"]
        config = TrainConfig(
            batch_size=cfg["batch_size"],
            learning_rate=cfg["learning_rate"],
            grad_clip_norm=cfg["grad_clip_norm"],
            validate_every=cfg["validate_every"],
            max_epochs=cfg["max_epochs"],
            seed=cfg["seed"],
            component_mask=frozenset(Component(v) for v in cfg["component_mask"]),
            backend=cfg["backend"],
            dim=cfg["dim"],
            min_freq=cfg["min_freq"],
            max_len_cc=cfg["max_len_cc"],
            max_len_td=cfg["max_len_td"],
            max_len_msg=cfg["max_len_msg"],
            hidden_sizes=tuple(cfg["hidden_sizes"]) if cfg["hidden_sizes"] else None,
            dropout_rate=cfg["dropout_rate"],
        )
        weights = [archive[f"mlp_w{i}"] for i in range(meta["n_layers"])]
        biases = [archive[f"mlp_b{i}"] for i in range(meta["n_layers"])]
        encoders = {
            Component(v): EncoderParams(embedding=archive[f"emb_{v}"])
            for v in meta["encoders"]
        }
        adam = None
        if meta.get("has_adam"):
            n_params = len(weights) + len(biases) + len(encoders)
            adam = AdamState(
                m=[archive[f"adam_m{i}"] for i in range(n_params)],
                v=[archive[f"adam_v{i}"] for i in range(n_params)],
                t=meta["adam_t"],
            )
    return ModelParams(
        vocab=make_vocab(meta["vocab"]),
        encoders=encoders,
        mlp=MlpParams(weights=weights, biases=biases, dropout_rate=config.dropout_rate),
        config=config,
        adam=adam,
    )
