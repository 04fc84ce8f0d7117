"""Run a pre-trained transformer over every lyric line and write the
sequence-start token's final-layer vector per line in the interchange
format (``count dim`` header, then ``song_id:line_index f1 ... f_dim``).
"""

from __future__ import annotations

import logging
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

log = logging.getLogger("embed_export")


@dataclass(frozen=True)
class ExportManifest:
    corpus_dir: str
    model: str
    out_path: str
    max_len: int = 64
    device: str = "cpu"
    batch_size: int = 16


class ModelLoadError(Exception):
    pass


def _load_model(manifest: ExportManifest):
    import torch
    from transformers import AutoModel, AutoTokenizer

    try:
        tokenizer = AutoTokenizer.from_pretrained(manifest.model)
        model = AutoModel.from_pretrained(manifest.model)
    except Exception as exc:
        raise ModelLoadError(f"cannot load model {manifest.model!r}: {exc}") \
            from exc
    model.to(torch.device(manifest.device))
    model.eval()
    return tokenizer, model


def _encode_batch(tokenizer, model, texts, manifest: ExportManifest):
    import torch

    lengths = [len(tokenizer(t)["input_ids"]) for t in texts]
    for text, n in zip(texts, lengths):
        if n > manifest.max_len:
            log.warning("truncating line of %d tokens to %d: %.40r",
                        n, manifest.max_len, text)
    batch = tokenizer(
        texts, padding=True, truncation=True, max_length=manifest.max_len,
        return_tensors="pt",
    ).to(model.device)
    with torch.no_grad():
        hidden = model(**batch).last_hidden_state
    return hidden[:, 0, :].cpu().numpy().astype(np.float32)


def export_embeddings(manifest: ExportManifest) -> int:
    """Write one vector per (song, line); returns the line count.

    Output lands atomically (temp file then rename). Deterministic: the
    model runs in evaluation mode on fixed inputs.
    """
    from .lrcread import read_corpus_lines

    entries = read_corpus_lines(manifest.corpus_dir)
    tokenizer, model = _load_model(manifest)

    keys = [f"{sid}:{idx}" for sid, idx, _ in entries]
    vectors = []
    for start in range(0, len(entries), manifest.batch_size):
        chunk = entries[start:start + manifest.batch_size]
        vectors.append(_encode_batch(
            tokenizer, model, [text for _, _, text in chunk], manifest))
    matrix = np.concatenate(vectors, axis=0)

    out = Path(manifest.out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=out.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"{len(keys)} {matrix.shape[1]}\n")
            for key, vec in zip(keys, matrix):
                fh.write(key + " " + " ".join(f"{v:.9g}" for v in vec) + "\n")
        os.replace(tmp_name, out)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    log.info("wrote %d vectors of dim %d to %s",
             len(keys), matrix.shape[1], out)
    return len(keys)
