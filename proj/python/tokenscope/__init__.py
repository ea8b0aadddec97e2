"""Per-token relevance maps from static word embeddings."""

from tokenscope._core import (
    EmbeddingTable,
    Error,
    ScoreBreakdown,
    analyze,
    assign_band,
    gap,
    score_token,
    tokenize,
    train_gam,
)

__all__ = [
    "EmbeddingTable",
    "Error",
    "ScoreBreakdown",
    "analyze",
    "assign_band",
    "gap",
    "score_token",
    "tokenize",
    "train_gam",
]
