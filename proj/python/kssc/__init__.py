"""Kernel sparse subspace clustering.

Columns are samples everywhere. `fit` clusters a D x N matrix; the returned
model assigns labels to new points without re-clustering.
"""

from ._kssc import (
    Error,
    Model,
    __version__,
    accuracy,
    corrupt_sparse,
    evaluate,
    fit,
    gen_concentric_circles,
    gen_polynomial_embedding,
    gen_union_subspaces,
    nmi,
    pairwise_f1,
    solve_frobenius_ssc,
    solve_robust_ssc,
    unit_normalize_columns,
    wilcoxon_ranksum,
)

__all__ = [
    "Error",
    "Model",
    "__version__",
    "accuracy",
    "corrupt_sparse",
    "evaluate",
    "fit",
    "gen_concentric_circles",
    "gen_polynomial_embedding",
    "gen_union_subspaces",
    "nmi",
    "pairwise_f1",
    "solve_frobenius_ssc",
    "solve_robust_ssc",
    "unit_normalize_columns",
    "wilcoxon_ranksum",
]
