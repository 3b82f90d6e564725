"""Optimal human-to-robot interface maps and bandwidth-limited observation channels."""

__version__ = "0.1.0"
