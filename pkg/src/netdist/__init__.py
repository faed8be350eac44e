"""Exact rearrangement and agreement distances for rooted binary phylogenetic networks."""

from .canonical import are_isomorphic, canonical_key
from .enewick import export_dot, parse_enewick, parse_enewick_document, write_enewick
from .errors import (
    BudgetExceededError,
    ConstructionError,
    EmbeddingError,
    InvalidOperationError,
    NetdistError,
    NonTreeError,
    ParseError,
    PruningError,
    TaxaMismatchError,
)
from .network import (
    ROOT_LABEL,
    PhyloNetwork,
    PrunedGraph,
    TaxaSet,
    ValidationReport,
    reticulation_count,
    validate,
    validate_pruned,
)
from .rearrange import (
    OpKind,
    OpSet,
    RearrangementOp,
    apply_op,
    enumerate_neighbors,
    is_valid_op,
)

__version__ = "0.1.0"

__all__ = [
    "ROOT_LABEL",
    "PhyloNetwork",
    "PrunedGraph",
    "TaxaSet",
    "ValidationReport",
    "OpKind",
    "OpSet",
    "RearrangementOp",
    "apply_op",
    "is_valid_op",
    "enumerate_neighbors",
    "canonical_key",
    "are_isomorphic",
    "parse_enewick",
    "parse_enewick_document",
    "write_enewick",
    "export_dot",
    "validate",
    "validate_pruned",
    "reticulation_count",
    "NetdistError",
    "ParseError",
    "InvalidOperationError",
    "PruningError",
    "TaxaMismatchError",
    "NonTreeError",
    "BudgetExceededError",
    "EmbeddingError",
    "ConstructionError",
    "__version__",
]
