"""Second-order HDMR, trust-region HDMR minimization and approximate dynamic programming."""

__version__ = "0.1.0"
