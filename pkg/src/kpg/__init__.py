"""Exact computations with KP tau functions: tropical limits, Hirota
varieties, the Sato Grassmannian, hyperelliptic and nodal curves."""

__version__ = "0.1.0"
