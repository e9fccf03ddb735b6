"""Direction guessing from two-qubit states with abstention."""

__version__ = "0.1.0"
