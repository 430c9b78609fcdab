"""Distributed algorithms for low-treewidth graphs on a simulated CONGEST network."""

__version__ = "0.1.0"
