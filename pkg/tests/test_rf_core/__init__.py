"""Tests for rf_core."""
