"""Workbench for continuous [0,1]-valued first-order logic on finite metric structures."""

__version__ = "0.1.0"
