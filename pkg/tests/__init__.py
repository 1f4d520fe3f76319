"""
Test suite for the magnetic flow toolkit.

This package contains unit tests for all components of the toolkit.
"""
