"""Hourly feature matrices in raw or physiological-word mode."""
