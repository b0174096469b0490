"""Interrogate deterministic decision programs with factual and
counterfactual queries, resolved by symbolic execution plus SMT solving.

Kept intentionally light: the bundled reference solver is spawned as
``python -m deposition.boxsat`` and should not pay for package imports.
"""

__version__ = "0.1.0"
