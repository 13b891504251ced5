"""Objective evaluation: total rental time of the served customers."""

from fractions import Fraction
from typing import Iterable

from app.schemas.models import Instance


def evaluate_objective(inst: Instance, served: Iterable[str]) -> Fraction:
    """
    Sum of (arrive - depart) over all demands of the served customers.

    Raises:
        UnknownCustomerError: a served id is not a customer of the instance
    """
    total = Fraction(0)
    for cid in set(served):
        total += inst.customer(cid).total_rental_time
    return total
