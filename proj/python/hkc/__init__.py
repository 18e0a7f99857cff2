"""Hierarchical clustering driven by a distributional kernel."""

from ._hkc import (
    Dendrogram,
    HkcResult,
    InvalidData,
    InvalidState,
    IsolationModel,
    ParseError,
    ari,
    bisect_kmeans,
    dendrogram_purity,
    fit_isolation_model,
    nmi,
    paper_analog,
    run_hkc,
    set_num_threads,
    wl_embed,
)

__all__ = [
    "Dendrogram",
    "HkcResult",
    "InvalidData",
    "InvalidState",
    "IsolationModel",
    "ParseError",
    "ari",
    "bisect_kmeans",
    "dendrogram_purity",
    "fit_isolation_model",
    "nmi",
    "paper_analog",
    "run_hkc",
    "set_num_threads",
    "wl_embed",
]
