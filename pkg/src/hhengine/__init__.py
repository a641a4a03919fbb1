"""Exact rational engine for the Hochschild structure of smooth
finite-dimensional algebras: integral kernels, Serre duality, the Mukai
pairing, Chern characters and the Cardy identities."""

__version__ = "0.1.0"
