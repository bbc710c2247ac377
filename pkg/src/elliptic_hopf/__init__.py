"""Exact verification workbench for elliptic current algebras, their level-1
free-boson realization and the infinite Hopf family built from them."""

__version__ = "0.1.0"
