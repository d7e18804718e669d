"""Molecule reduction: from signed ternary couples to spanning trees."""

__version__ = "0.1.0"
