"""Spectral multiplier laboratory for sectorial matrix models on l^p_n.

Submodules: ``function_spaces`` (multipliers, Sobolev and Hoermander norms),
``operator_models`` (model operators, families, sectoriality certificates),
``calculus`` (functional-calculus engines), ``rbound`` (R-bound estimates)
and ``harness`` (experiments and the command line).
"""

__version__ = "0.1.0"
