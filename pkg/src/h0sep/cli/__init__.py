"""Command-line interface and file formats."""
