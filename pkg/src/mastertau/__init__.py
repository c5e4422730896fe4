"""Master T-operator of the twisted inhomogeneous GL(N) XXX chain."""

__version__ = "0.1.0"
