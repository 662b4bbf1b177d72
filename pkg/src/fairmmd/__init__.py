"""fair max-min diversification by padded decompositions and maximum flow."""
__version__ = "0.1.0"
