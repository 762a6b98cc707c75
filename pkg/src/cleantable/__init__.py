"""Cleaning-table interactive reinforcement learning with multi-modal advice."""

__version__ = "0.1.0"
