"""Simulator and solver toolkit for VQE + quantum subspace expansion on two-qubit H2."""

__version__ = "0.1.0"
