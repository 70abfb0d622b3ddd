"""Classifier architectures: two-layer LSTM, temporal CNN, logistic regression."""
