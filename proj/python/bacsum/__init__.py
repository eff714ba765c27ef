"""BACnet/IP packet decoding and LLM summarization pipeline."""

from ._bacsum import (
    BacsumError,
    cosine_similarity,
    decode,
    estimate_tokens,
    format_mean,
    keywords,
    run_cli,
    score,
    scores_table,
    sha256_hex,
)

__all__ = [
    "BacsumError",
    "cosine_similarity",
    "decode",
    "estimate_tokens",
    "format_mean",
    "keywords",
    "run_cli",
    "score",
    "scores_table",
    "sha256_hex",
]
