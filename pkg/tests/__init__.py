"""
Tests Package

This package contains all test modules for the EVSP toolkit.
"""
