"""Topic model over clinical notes (collapsed Gibbs LDA)."""
