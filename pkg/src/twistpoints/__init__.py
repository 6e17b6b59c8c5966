"""Finite-dimensional symplectic toolkit: normal forms, logarithms, indices,
Hamiltonian composition calculus and a verification harness."""

__version__ = "0.1.0"
