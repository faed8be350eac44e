"""Exception types shared across the package."""


class NetdistError(Exception):
    """Base class for all package errors."""


class ParseError(NetdistError):
    """Extended-Newick syntax or semantic error with a text position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.message = message
        self.position = position


class InvalidOperationError(NetdistError):
    """A rearrangement operation violates one of its defining clauses."""


class PruningError(NetdistError):
    """A pruning violates its precondition."""


class TaxaMismatchError(NetdistError):
    """Two networks do not share the same taxa."""


class NonTreeError(NetdistError):
    """A tree-only operation was applied to a network with reticulations."""


class BudgetExceededError(NetdistError):
    """A search exceeded its state budget; carries the best bound found."""

    def __init__(self, message: str, lower_bound: int | None = None):
        super().__init__(message)
        self.lower_bound = lower_bound


class EmbeddingError(NetdistError):
    """An embedding manipulation violates its precondition."""


class ConstructionError(NetdistError):
    """Internal invariant breach in a sequence builder; carries a state dump."""

    def __init__(self, message: str, dump: str = ""):
        super().__init__(message + ("\n" + dump if dump else ""))
        self.dump = dump
