"""Decentralized multi-biped payload transport at desk scale."""

__version__ = "0.1.0"
