"""Troubleshooting knowledge base: chunking, embedding, vector store.

Documents are cut into overlapping character windows aligned to whitespace so
no word is split.  Each chunk is embedded either by the deterministic offline
embedder (hashed bag of words, no network) or by a remote embedding endpoint.
The store keeps every chunk with its vector in a single JSON file.

The offline embedder hashes each lowercase alphanumeric token with FNV-1a
(64 bit), buckets the hash modulo the dimension, counts, and L2-normalizes.
It needs no model download, is stable across runs and machines, and two
texts sharing no token are orthogonal unless buckets collide.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Protocol, Sequence

import numpy as np

from . import endpoints
from .errors import DimensionMismatch, EmptyDocument, EndpointError, IoError, SchemaError

DEFAULT_DIMENSION = 512
DEFAULT_MAX_CHARS = 1000
DEFAULT_OVERLAP_CHARS = 200

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_TOKEN_RE = re.compile(r"[a-z0-9]+")
_HEADING_RE = re.compile(r"^(#{1,6})[ \t]+(.+?)\s*$", re.MULTILINE)


@dataclass(eq=False)
class KnowledgeChunk:
    """One retrievable span of a document."""

    chunk_id: str
    doc_id: str
    text: str
    char_start: int
    char_end: int
    section: str | None = None
    embedding: np.ndarray | None = None


def fnv1a_64(data: bytes) -> int:
    """64-bit FNV-1a hash."""
    value = _FNV_OFFSET
    for byte in data:
        value ^= byte
        value = (value * _FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return value


def tokenize(text: str) -> list[str]:
    """Lowercase alphanumeric runs; everything else separates tokens."""
    return _TOKEN_RE.findall(text.lower())


class Embedder(Protocol):
    dimension: int

    def embed(self, text: str) -> np.ndarray: ...


class OfflineEmbedder:
    """Hashed bag-of-words embedding, deterministic and network-free."""

    def __init__(self, dimension: int = DEFAULT_DIMENSION):
        if dimension < 1:
            raise ValueError("dimension must be >= 1")
        self.dimension = dimension

    def embed(self, text: str) -> np.ndarray:
        if not text:
            raise ValueError("cannot embed empty text")
        vector = np.zeros(self.dimension)
        for token in tokenize(text):
            vector[fnv1a_64(token.encode("utf-8")) % self.dimension] += 1.0
        norm = np.linalg.norm(vector)
        return vector / norm if norm > 0 else vector


class RemoteEmbedder:
    """Embedding endpoint client: POST {base_url}/embed, one input per call."""

    def __init__(
        self,
        base_url: str,
        model: str,
        dimension: int | None = None,
        timeout: float = endpoints.DEFAULT_TIMEOUT,
        retries: int = endpoints.DEFAULT_RETRIES,
        backoff: float = endpoints.DEFAULT_BACKOFF,
    ):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.dimension = dimension if dimension is not None else 0
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff

    def embed(self, text: str) -> np.ndarray:
        if not text:
            raise ValueError("cannot embed empty text")
        body = endpoints.post_json(
            f"{self.base_url}/embed",
            {"model": self.model, "input": [text]},
            timeout=self.timeout,
            retries=self.retries,
            backoff=self.backoff,
        )
        try:
            vector = np.asarray(body["embeddings"][0], dtype=np.float64)
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise EndpointError(f"malformed embedding response: {exc}") from exc
        if self.dimension == 0:
            self.dimension = len(vector)
        if len(vector) != self.dimension:
            raise DimensionMismatch(
                f"endpoint returned {len(vector)} dimensions, expected {self.dimension}"
            )
        return vector


def embed_text(text: str, embedder: Embedder) -> np.ndarray:
    """Embed one text with whichever embedder is configured."""
    return embedder.embed(text)


def _snap_back(text: str, position: int, low: int) -> int:
    """Largest boundary in (low, position] sitting right after whitespace.

    Falls back to ``position`` (a hard cut) when the window has none.
    """
    for candidate in range(position, low, -1):
        if text[candidate - 1].isspace():
            return candidate
    return position


def chunk_document(
    doc_id: str,
    text: str,
    max_chars: int = DEFAULT_MAX_CHARS,
    overlap_chars: int = DEFAULT_OVERLAP_CHARS,
) -> list[KnowledgeChunk]:
    """Cut a document into overlapping windows of at most ``max_chars``.

    Window starts advance by ``max_chars - overlap_chars``; both cut
    positions are snapped backward to whitespace when the window contains
    any, so words are never split.  Dropping each chunk's overlap-covered
    prefix and concatenating reproduces the document exactly
    (:func:`reconstruct_document`).
    """
    if not text:
        raise EmptyDocument(f"document {doc_id!r} is empty")
    if max_chars < 1:
        raise ValueError("max_chars must be >= 1")
    if not 0 <= overlap_chars < max_chars:
        raise ValueError("overlap_chars must satisfy 0 <= overlap < max_chars")

    stride = max_chars - overlap_chars
    length = len(text)
    chunks: list[KnowledgeChunk] = []
    start = 0
    while True:
        if start + max_chars >= length:
            end = length
        else:
            end = _snap_back(text, start + max_chars, start)
        chunks.append(
            KnowledgeChunk(
                chunk_id=f"{doc_id}#{len(chunks):04d}",
                doc_id=doc_id,
                text=text[start:end],
                char_start=start,
                char_end=end,
            )
        )
        if start + stride >= length:
            break
        start = _snap_back(text, start + stride, start)
    return chunks


def reconstruct_document(chunks: Sequence[KnowledgeChunk]) -> str:
    """Invert :func:`chunk_document` by dropping overlap-covered prefixes."""
    parts: list[str] = []
    previous_end = 0
    for chunk in chunks:
        parts.append(chunk.text[previous_end - chunk.char_start :])
        previous_end = chunk.char_end
    return "".join(parts)


def sections_for_chunks(text: str, chunks: Iterable[KnowledgeChunk]) -> None:
    """Assign each chunk the nearest markdown heading at or before its start."""
    headings = [(m.start(), m.group(2)) for m in _HEADING_RE.finditer(text)]
    for chunk in chunks:
        section = None
        for offset, title in headings:
            if offset <= chunk.char_start:
                section = title
            else:
                break
        chunk.section = section


class VectorStore:
    """All chunks of all ingested documents plus a document manifest."""

    def __init__(self, dimension: int = DEFAULT_DIMENSION, embedder_name: str = "offline"):
        if dimension < 1:
            raise ValueError("dimension must be >= 1")
        self.dimension = dimension
        self.embedder_name = embedder_name
        self.chunks: list[KnowledgeChunk] = []
        self.manifest: dict[str, dict[str, str]] = {}

    def __len__(self) -> int:
        return len(self.chunks)

    def add_document(
        self, doc_id: str, title: str, source: str, chunks: Sequence[KnowledgeChunk]
    ) -> None:
        """Register a document, replacing any previous version of it."""
        for chunk in chunks:
            if chunk.embedding is None:
                raise ValueError(f"chunk {chunk.chunk_id} has no embedding")
            if len(chunk.embedding) != self.dimension:
                raise DimensionMismatch(
                    f"chunk {chunk.chunk_id}: embedding has {len(chunk.embedding)} "
                    f"dimensions, store expects {self.dimension}"
                )
        self.chunks = [c for c in self.chunks if c.doc_id != doc_id] + list(chunks)
        self.chunks.sort(key=lambda c: c.chunk_id)
        self.manifest[doc_id] = {"title": title, "source": source}

    def save(self, path: str | os.PathLike[str]) -> None:
        payload = {
            "version": 1,
            "dimension": self.dimension,
            "embedder": self.embedder_name,
            "manifest": self.manifest,
            "chunks": [
                {
                    "chunk_id": c.chunk_id,
                    "doc_id": c.doc_id,
                    "section": c.section,
                    "text": c.text,
                    "char_start": c.char_start,
                    "char_end": c.char_end,
                    "embedding": None if c.embedding is None else c.embedding.tolist(),
                }
                for c in self.chunks
            ],
        }
        try:
            with open(path, "w", encoding="utf-8") as handle:
                json.dump(payload, handle, indent=1, sort_keys=True)
                handle.write("\n")
        except OSError as exc:
            raise IoError(f"cannot write store: {path}") from exc

    @classmethod
    def load(cls, path: str | os.PathLike[str]) -> VectorStore:
        try:
            with open(path, "r", encoding="utf-8") as handle:
                payload = json.load(handle)
        except OSError as exc:
            raise IoError(f"cannot read store: {path}") from exc
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: not valid JSON") from exc
        if payload.get("version") != 1:
            raise SchemaError(f"{path}: unsupported store version {payload.get('version')!r}")
        store = cls(dimension=int(payload["dimension"]), embedder_name=payload["embedder"])
        store.manifest = dict(payload["manifest"])
        for entry in payload["chunks"]:
            store.chunks.append(
                KnowledgeChunk(
                    chunk_id=entry["chunk_id"],
                    doc_id=entry["doc_id"],
                    section=entry["section"],
                    text=entry["text"],
                    char_start=int(entry["char_start"]),
                    char_end=int(entry["char_end"]),
                    embedding=(
                        None
                        if entry["embedding"] is None
                        else np.asarray(entry["embedding"], dtype=np.float64)
                    ),
                )
            )
        return store


def document_title(text: str, fallback: str) -> str:
    """First markdown heading, or the fallback name."""
    match = _HEADING_RE.search(text)
    return match.group(2) if match else fallback


def ingest_files(
    store: VectorStore,
    paths: Sequence[str | os.PathLike[str]],
    embedder: Embedder,
    max_chars: int = DEFAULT_MAX_CHARS,
    overlap_chars: int = DEFAULT_OVERLAP_CHARS,
) -> int:
    """Chunk, embed, and register documents; returns the new chunk count.

    Markdown files get per-chunk section labels from their headings; plain
    text files get none.  Re-ingesting a document replaces its chunks, so
    ingestion is idempotent for unchanged files.
    """
    added = 0
    for raw_path in paths:
        path = Path(raw_path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise IoError(f"cannot read document: {path}") from exc
        doc_id = path.stem
        chunks = chunk_document(doc_id, text, max_chars=max_chars, overlap_chars=overlap_chars)
        if path.suffix.lower() in (".md", ".markdown"):
            sections_for_chunks(text, chunks)
        for chunk in chunks:
            chunk.embedding = embed_text(chunk.text, embedder)
        store.add_document(doc_id, document_title(text, doc_id), str(path), chunks)
        added += len(chunks)
    return added
