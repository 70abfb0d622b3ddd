"""Sliding windows, gap-time labels, patient-level splits and example shards."""
