from .ast import Program, StepBudget
from .parse import parse_program
from .interp import interpret

__all__ = ["Program", "StepBudget", "parse_program", "interpret"]
