"""Interpretability: feature occlusion, extreme-example trajectories, activation maximization."""
