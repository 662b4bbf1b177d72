"""Datasets from files and generators."""
