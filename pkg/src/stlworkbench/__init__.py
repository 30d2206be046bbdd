"""Interactive workbench: natural language -> STL formulas -> grid-world policies."""

__version__ = "0.1.0"
