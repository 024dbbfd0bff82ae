"""Command-line front end."""
from .config import RunConfig, load_config, parse_config_text
from .main import build_parser, main
from .output import CSV_COLUMNS, csv_to_rows, rows_to_csv

__all__ = ["CSV_COLUMNS", "RunConfig", "build_parser", "csv_to_rows", "load_config", "main",
           "parse_config_text", "rows_to_csv"]
