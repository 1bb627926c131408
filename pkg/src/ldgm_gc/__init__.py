"""Straggler-tolerant distributed SGD with LDGM gradient codes: simulation,
peeling decoding, density evolution and learning-curve experiments."""

__version__ = "0.1.0"
