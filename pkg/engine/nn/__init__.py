"""Numeric core: layers with hand-derived gradients, loss, Adam, gradient checks.

All arrays are float64.
"""
