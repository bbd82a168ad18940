"""Utility scripts for project maintenance."""
