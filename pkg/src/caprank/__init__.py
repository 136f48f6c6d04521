"""Battle-based ranking of molecule caption sources for property prediction."""

__version__ = "0.1.0"
