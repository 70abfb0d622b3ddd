"""Plain-text stage logs and failure reports."""
