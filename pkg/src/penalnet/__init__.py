"""Gene-network inference by node-wise penalized regression, with benchmarking tools."""

__version__ = "0.1.0"
