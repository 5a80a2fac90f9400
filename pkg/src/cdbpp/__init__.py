"""Variational (QAOA and counter-diabatic) sampling of single-bin partial
solutions for one-dimensional bin packing, on an exact statevector simulator."""

__version__ = "0.1.0"
