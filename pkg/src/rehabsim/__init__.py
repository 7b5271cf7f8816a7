"""Deterministic desk-scale simulator and scoring suite for an
EMG-driven hand-rehabilitation system."""

__version__ = "0.1.0"
