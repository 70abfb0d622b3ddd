"""Training loop with early stopping, AUC metrics and evaluation reports."""
