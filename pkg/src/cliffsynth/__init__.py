"""Layered synthesis of stabilizer circuits from binary symplectic tableaux."""

__version__ = "0.1.0"
