"""Ensures the tests directory (oracles module) is importable."""
