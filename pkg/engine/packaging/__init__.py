"""Run folders and artifact writing."""
