"""Grounded dense captioning of comic panels, with attribute-level evaluation."""

__version__ = "0.1.0"
