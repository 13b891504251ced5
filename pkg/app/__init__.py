"""
EVSP Toolkit - Main Application Package

This package builds and solves the EVSP3 energy-flow model for electric
vehicle sharing, runs the LRBVF heuristic and the RCBVF exact method,
validates solutions, and generates benchmark and reduction instances.
"""

__version__ = "0.1.0"
__author__ = "EVSP Toolkit Team"
