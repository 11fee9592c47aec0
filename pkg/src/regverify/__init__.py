"""Presence-reachability verification for parameterized register protocols."""

__version__ = "0.1.0"
