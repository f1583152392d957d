"""Tests for samplers."""
