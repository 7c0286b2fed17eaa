class DatasetError(ValueError):
    """Malformed input data; the message carries the 1-based row/column."""

    def __init__(self, message, row=None, column=None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)
        self.row = row
        self.column = column


class PartitionError(RuntimeError):
    """The bipartite graph cannot be partitioned (zero rows, degenerate spectrum)."""


class StageError(RuntimeError):
    """A pipeline stage failed. ``stage`` names it; the original error is chained."""

    def __init__(self, stage, message, config=None):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.config = config
