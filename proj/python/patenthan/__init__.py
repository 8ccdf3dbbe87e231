"""Patent screening with a hierarchical attention network over claims."""

from ._patenthan import (
    Claim,
    ClaimType,
    Embeddings,
    HashedEmbedder,
    Horizon,
    InvalidInput,
    IoError,
    LabeledPatent,
    Model,
    ModelConfig,
    NumericError,
    PatentHANError,
    PatentRecord,
    ShapeError,
    ValueClass,
    assign_labels,
    compute_metrics,
    embed_corpus,
    from_vectors,
    load_corpus,
    read_embeddings,
    synthetic_corpus,
    train,
    welch_ttest,
    write_corpus,
)

__all__ = [name for name in dir() if not name.startswith("_")]
