"""Integration tests for reeftip: full ramped runs and the command line."""
