"""Elliptic-curve analogue of the twin-prime problem: constants, sieve bounds and prime censuses."""

__version__ = "0.1.0"
