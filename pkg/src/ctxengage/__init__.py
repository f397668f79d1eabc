"""Context-only tweet engagement prediction pipeline at desk scale."""

from .ingest import DatasetId, parse_tsv, read_table, stage_exists, write_table
from .table import ColumnTable, ColumnType

__all__ = ["ColumnTable", "ColumnType", "DatasetId", "parse_tsv", "read_table",
           "stage_exists", "write_table"]
__version__ = "0.1.0"
