"""Tests for analytic_models."""
