"""Test suite for the reeftip package."""
