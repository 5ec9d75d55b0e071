"""Iterative approximate Byzantine consensus on directed graphs."""
