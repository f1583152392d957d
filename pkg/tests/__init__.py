"""Test package for documentation-toolkit."""
