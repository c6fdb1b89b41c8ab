"""RAG context engine: chunking, cosine top-k retrieval, entropy
diagnostics, and context summarization.

Stores are exact-search (a few hundred chunks at most); vectors are unit
norm so cosine similarity is a dot product.  Normalized entropy over the
clamped score distribution diagnoses ambiguous retrievals: 1.0 means the
returned chunks are indistinguishable, 0.0 means one chunk dominates.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

DEFAULT_CHUNK_SIZE = 800
DEFAULT_OVERLAP = 100
DEFAULT_TOP_K = 5
SENTENCE_ENDS = (". ", ".\n", "! ", "!\n", "? ", "?\n")


class RetrievalError(RuntimeError):
    pass


@dataclass(frozen=True)
class Chunk:
    doc_id: str
    ordinal: int
    text: str


@dataclass
class RetrievalResult:
    ranked: list[tuple[Chunk, float]]
    normalized_entropy: float

    def to_json(self) -> dict:
        return {
            "chunks": [
                {"doc_id": c.doc_id, "ordinal": c.ordinal, "score": s, "text": c.text}
                for c, s in self.ranked
            ],
            "normalized_entropy": self.normalized_entropy,
        }


def _boundary(text: str, start: int, hard_end: int, min_end: int) -> int:
    """Preferred cut point in text[start:hard_end]: last blank line, else
    last sentence end (with one-sentence slack past hard_end), else hard."""
    window = text[start:hard_end]
    cut = window.rfind("\n\n")
    if cut > min_end - start:
        return start + cut + 2
    best = -1
    for mark in SENTENCE_ENDS:
        pos = window.rfind(mark)
        if pos > best:
            best = pos + len(mark)
    if best > min_end - start:
        return start + best
    return hard_end


def chunk_documents(
    docs: list[tuple[str, str]],
    target_size: int = DEFAULT_CHUNK_SIZE,
    overlap: int = DEFAULT_OVERLAP,
) -> list[Chunk]:
    """Split (doc_id, text) pairs into overlapping chunks.

    Consecutive chunks of a document share exactly `overlap` characters;
    boundaries prefer blank lines, then sentence ends.
    """
    if not target_size > overlap >= 0:
        raise ValueError("require target_size > overlap >= 0")
    chunks: list[Chunk] = []
    for doc_id, text in docs:
        if not text:
            continue
        if len(text) <= target_size:
            chunks.append(Chunk(doc_id, 0, text))
            continue
        start = 0
        ordinal = 0
        while start < len(text):
            if len(text) - start <= target_size:
                chunks.append(Chunk(doc_id, ordinal, text[start:]))
                break
            end = _boundary(text, start, start + target_size, start + overlap + 1)
            chunks.append(Chunk(doc_id, ordinal, text[start:end]))
            start = end - overlap
            ordinal += 1
    return chunks


class ChunkStore:
    """Immutable after build; safe for concurrent queries."""

    def __init__(self, chunks: list[Chunk], vectors: np.ndarray, embedder):
        if len(chunks) != len(vectors):
            raise ValueError("chunk/vector count mismatch")
        if len(vectors) and len(set(v.shape for v in vectors)) > 1:
            raise ValueError("non-uniform vector dimensions")
        self.chunks = list(chunks)
        self.vectors = np.asarray(vectors, dtype=float)
        self.embedder = embedder

    @classmethod
    def build(cls, docs: list[tuple[str, str]], embedder,
              target_size: int = DEFAULT_CHUNK_SIZE, overlap: int = DEFAULT_OVERLAP):
        chunks = chunk_documents(docs, target_size, overlap)
        vectors = np.array([embedder.embed(c.text) for c in chunks], dtype=float)
        return cls(chunks, vectors if len(chunks) else np.zeros((0, 0)), embedder)

    def save(self, path) -> None:
        payload = {
            "chunks": [{"doc_id": c.doc_id, "ordinal": c.ordinal, "text": c.text}
                       for c in self.chunks],
            "vectors": self.vectors.tolist(),
        }
        tmp = str(path) + ".tmp"
        with open(tmp, "w", encoding="utf-8") as f:
            json.dump(payload, f, ensure_ascii=False)
        os.replace(tmp, path)

    @classmethod
    def load(cls, path, embedder) -> "ChunkStore":
        with open(path, encoding="utf-8") as f:
            payload = json.load(f)
        chunks = [Chunk(c["doc_id"], c["ordinal"], c["text"]) for c in payload["chunks"]]
        return cls(chunks, np.asarray(payload["vectors"], dtype=float), embedder)

    def retrieve(self, query: str, k: int = DEFAULT_TOP_K) -> RetrievalResult:
        """Top-k chunks by cosine similarity to the query embedding; ties
        broken by (doc_id, ordinal) for determinism."""
        if not self.chunks:
            raise RetrievalError("empty chunk store")
        q = np.asarray(self.embedder.embed(query), dtype=float)
        scores = self.vectors @ q
        order = sorted(
            range(len(self.chunks)),
            key=lambda i: (-scores[i], self.chunks[i].doc_id, self.chunks[i].ordinal),
        )[:k]
        ranked = [(self.chunks[i], float(scores[i])) for i in order]
        return RetrievalResult(ranked, normalized_entropy([s for _, s in ranked]))


def normalized_entropy(scores: list[float]) -> float:
    """H(p)/ln(k') over clamped scores; 1.0 when all scores are
    non-positive (maximally ambiguous) or when a single chunk returns."""
    if not scores:
        return 1.0
    clamped = [max(s, 0.0) for s in scores]
    total = sum(clamped)
    if total <= 0.0:
        return 1.0
    if len(clamped) == 1:
        return 1.0
    p = [s / total for s in clamped]
    h = -sum(pi * math.log(pi) for pi in p if pi > 0)
    return h / math.log(len(clamped))


def summarize(result: RetrievalResult, backend, char_budget: int = 1200) -> str:
    """Condense retrieved chunks into bounded context text.

    Backends flagged deterministic_summary (the scripted mock) get the
    deterministic path: chunk texts concatenated and truncated.
    """
    texts = [c.text for c, _ in result.ranked]
    if getattr(backend, "deterministic_summary", False):
        return "\n\n".join(texts)[:char_budget]
    from .backends import ChatMessage, GenerationRequest

    req = GenerationRequest(
        messages=(
            ChatMessage("system", "Summarize the following APL idiom documentation "
                                  "into a concise reference for a translator."),
            ChatMessage("user", "\n\n".join(texts)),
        )
    )
    return backend.generate(req)[:char_budget]
