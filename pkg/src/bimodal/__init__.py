"""Workbench for bimodal product logics and counter-machine encodings."""

__version__ = "0.1.0"
