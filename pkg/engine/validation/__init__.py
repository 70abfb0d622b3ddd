"""Validation of stays and cohorts (rules return messages; callers decide)."""
