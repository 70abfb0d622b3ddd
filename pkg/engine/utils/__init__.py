"""Shared helpers: hashing, binary containers, CSV artifacts, file scanning."""
