"""Recurrent action-conditional environment simulators on toy pixel worlds."""

__version__ = "0.1.0"
