"""Detection-driven single-object tracking."""

__version__ = "0.1.0"
