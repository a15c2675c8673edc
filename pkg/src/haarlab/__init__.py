"""Exact dyadic and one-third-shifted interval toolkit."""
