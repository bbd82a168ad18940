"""Unit tests for reeftip."""
