"""Transformer-logit exporter for the textseam emissions wire format."""

from .exporter import ExportConfig, ExportError, ExportSummary, export_emissions

__version__ = "0.1.0"
