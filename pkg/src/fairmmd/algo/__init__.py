"""Pruning, padded decomposition, flow assignment, and their combination."""
