"""Tests for shared_utilities module"""
