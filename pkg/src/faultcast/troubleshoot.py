"""Retrieval-augmented troubleshooting for anomalous KPI sets.

Pipeline: phrase a question from the highest-scoring anomalous KPIs, embed
it, retrieve the most similar knowledge chunks, compose an augmented prompt,
and ask a completion client.  The answer keeps links to every chunk it was
grounded on.  Callers enforce the gate: this module is only reached when the
current state was classified anomalous.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

from . import endpoints
from .errors import DimensionMismatch, EmptyStore, EndpointError, MissingDescriptor
from .kpi import KpiDescriptor, KpiId
from .knowledge import Embedder, KnowledgeChunk, OfflineEmbedder, VectorStore, embed_text
from .ranker import KpiAnomaly

QUESTION_PREFIX = "What is the cause of anomalous values regarding "
CONTEXT_HEADER = "Use the following context to answer."


@dataclass(frozen=True)
class PromptSpec:
    """How many KPI descriptions go into the question, and the join text."""

    kpi_count: int = 3
    separator: str = ", "

    def __post_init__(self) -> None:
        if not 2 <= self.kpi_count <= 4:
            raise ValueError("kpi_count must lie in [2, 4]")


@dataclass(frozen=True)
class RetrievalConfig:
    top_k: int = 4
    min_similarity: float = 0.0

    def __post_init__(self) -> None:
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        if not -1.0 <= self.min_similarity <= 1.0:
            raise ValueError("min_similarity must lie in [-1, 1]")


@dataclass(frozen=True)
class TroubleshootingAnswer:
    prompt: str
    retrieved: tuple[tuple[str, float], ...]
    augmented_prompt: str
    answer_text: str
    sources: tuple[tuple[str, str | None, str], ...]


def build_prompt(
    anomalies: Sequence[KpiAnomaly],
    descriptors: dict[KpiId, KpiDescriptor],
    spec: PromptSpec = PromptSpec(),
) -> str:
    """Phrase the troubleshooting question from the top-scoring KPIs.

    Selects up to ``spec.kpi_count`` anomalies by descending score (name as
    tiebreak), deduplicates identical descriptions preserving order, and
    joins them after the fixed question prefix.
    """
    if not anomalies:
        raise ValueError("anomalies must be non-empty")
    selected = sorted(anomalies, key=lambda a: (-a.score, str(a.kpi)))[: spec.kpi_count]
    descriptions: list[str] = []
    for anomaly in selected:
        descriptor = descriptors.get(anomaly.kpi)
        if descriptor is None:
            raise MissingDescriptor(f"no description for KPI {anomaly.kpi}")
        if descriptor.description not in descriptions:
            descriptions.append(descriptor.description)
    return QUESTION_PREFIX + spec.separator.join(descriptions)


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine of the angle between two vectors; 0 if either is zero."""
    if len(a) != len(b):
        raise DimensionMismatch(f"vector lengths differ: {len(a)} vs {len(b)}")
    denominator = np.linalg.norm(a) * np.linalg.norm(b)
    if denominator == 0.0:
        return 0.0
    return float(np.dot(a, b) / denominator)


def retrieve(
    store: VectorStore,
    query_embedding: np.ndarray,
    config: RetrievalConfig = RetrievalConfig(),
) -> list[tuple[KnowledgeChunk, float]]:
    """Most similar chunks, descending; ties broken by ascending chunk_id."""
    if len(store) == 0:
        raise EmptyStore("cannot retrieve from an empty store")
    query_embedding = np.asarray(query_embedding, dtype=np.float64)
    if len(query_embedding) != store.dimension:
        raise DimensionMismatch(
            f"query has {len(query_embedding)} dimensions, store expects {store.dimension}"
        )
    scored = [
        (chunk, cosine_similarity(query_embedding, chunk.embedding))
        for chunk in store.chunks
        if chunk.embedding is not None
    ]
    scored.sort(key=lambda pair: (-pair[1], pair[0].chunk_id))
    return [pair for pair in scored if pair[1] >= config.min_similarity][: config.top_k]


def compose_augmented_prompt(
    prompt: str, retrieved: Sequence[tuple[KnowledgeChunk, float]]
) -> str:
    """Deterministic byte-exact prompt layout.

    Header line, blank line, one ``[source: id]`` block per chunk (text
    followed by a blank line), then ``Question: <prompt>``.
    """
    parts = [CONTEXT_HEADER, "\n\n"]
    for chunk, _ in retrieved:
        parts.append(f"[source: {chunk.chunk_id}]\n{chunk.text}\n\n")
    parts.append(f"Question: {prompt}")
    return "".join(parts)


class CompletionClient(Protocol):
    def complete(self, augmented_prompt: str) -> str: ...


class EchoClient:
    """Offline test double: answers with the context portion of the prompt."""

    def complete(self, augmented_prompt: str) -> str:
        body = augmented_prompt
        header = CONTEXT_HEADER + "\n\n"
        if body.startswith(header):
            body = body[len(header) :]
        question_at = body.rfind("Question: ")
        return body[:question_at] if question_at >= 0 else body


class HttpCompletionClient:
    """Completion endpoint client: POST {base_url}/complete."""

    def __init__(
        self,
        base_url: str,
        model: str,
        timeout: float = endpoints.DEFAULT_TIMEOUT,
        retries: int = endpoints.DEFAULT_RETRIES,
        backoff: float = endpoints.DEFAULT_BACKOFF,
    ):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff

    def complete(self, augmented_prompt: str) -> str:
        body = endpoints.post_json(
            f"{self.base_url}/complete",
            {"model": self.model, "prompt": augmented_prompt},
            timeout=self.timeout,
            retries=self.retries,
            backoff=self.backoff,
        )
        try:
            return str(body["response"])
        except KeyError as exc:
            raise EndpointError("completion response lacks a 'response' field") from exc


def troubleshoot(
    anomalies: Sequence[KpiAnomaly],
    descriptors: dict[KpiId, KpiDescriptor],
    store: VectorStore,
    spec: PromptSpec = PromptSpec(),
    config: RetrievalConfig = RetrievalConfig(),
    llm: CompletionClient | None = None,
    embedder: Embedder | None = None,
) -> TroubleshootingAnswer:
    """Full question -> retrieve -> augment -> answer pipeline.

    With no explicit ``embedder`` the store must have been built with the
    offline embedder; with no ``llm`` the offline echo client is used.
    """
    if embedder is None:
        if store.embedder_name != "offline":
            raise ValueError(
                f"store was embedded with {store.embedder_name!r}; pass a matching embedder"
            )
        embedder = OfflineEmbedder(store.dimension)
    if llm is None:
        llm = EchoClient()
    prompt = build_prompt(anomalies, descriptors, spec)
    query = embed_text(prompt, embedder)
    retrieved = retrieve(store, query, config)
    augmented = compose_augmented_prompt(prompt, retrieved)
    answer = llm.complete(augmented)
    return TroubleshootingAnswer(
        prompt=prompt,
        retrieved=tuple((chunk.chunk_id, similarity) for chunk, similarity in retrieved),
        augmented_prompt=augmented,
        answer_text=answer,
        sources=tuple((chunk.doc_id, chunk.section, chunk.chunk_id) for chunk, _ in retrieved),
    )
