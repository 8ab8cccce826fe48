"""Executable constructions for weighted backward shifts on sequence spaces."""

__version__ = "0.1.0"
