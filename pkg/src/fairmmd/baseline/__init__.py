"""Exact oracles and the greedy baseline."""
