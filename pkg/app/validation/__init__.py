"""
Validation Package

Independent feasibility and objective audit of solutions.
"""

from app.validation.validator import validate, replay_energy

__all__ = ["validate", "replay_energy"]
