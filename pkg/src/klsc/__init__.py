"""Hermitian metrics with Kähler-like scalar curvature on annuli in C^n."""

__version__ = "0.1.0"
