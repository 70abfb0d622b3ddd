"""Synthetic cohorts with planted, documented signal."""
