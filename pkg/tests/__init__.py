"""Test suite for diffractive_classifier."""
