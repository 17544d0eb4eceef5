"""Exact negative-dependence and log-concavity checks for measures on the Boolean cube."""

from .errors import NegDepError
from .measure import INFINITY, ExternalField, Measure, condition, impose_field, load_measure, measure_from_json, project
from .verdict import Budget, CorrelationWitness, Status, Verdict

__all__ = [
    "INFINITY", "Budget", "CorrelationWitness", "ExternalField", "Measure", "NegDepError", "Status", "Verdict",
    "condition", "impose_field", "load_measure", "measure_from_json", "project",
]
__version__ = "0.1.0"
