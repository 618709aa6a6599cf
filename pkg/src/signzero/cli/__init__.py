"""Batch driver: configuration, posterior loop and result files."""
