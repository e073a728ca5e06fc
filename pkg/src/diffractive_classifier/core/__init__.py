"""Core simulation, training and persistence modules."""
