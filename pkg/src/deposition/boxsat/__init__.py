"""Self-contained SMT-LIB v2 solver for the quantifier-free float+bitvector
fragment this package emits.

Decides satisfiability by interval narrowing plus box splitting over the
finite value spaces (bitvector patterns, the 2^64 float patterns ordered by
value), probing candidate models with an exact IEEE evaluator. Complete in
principle because every sort is finite and singleton boxes evaluate exactly;
a box budget returns "unknown" when exceeded. Runs as an external process
speaking SMT-LIB over stdin/stdout, so any other SMT-LIB solver can be
swapped in through configuration.
"""
