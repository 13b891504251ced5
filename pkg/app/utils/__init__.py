"""
Utilities Package

Logging setup shared by the command line and the solver modules.
"""
