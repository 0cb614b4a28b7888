"""Construction and certification of uniformly Euclidean singular metrics."""

__version__ = "0.1.0"
